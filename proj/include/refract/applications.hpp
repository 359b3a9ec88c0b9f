#pragma once

#include "refract/identities.hpp"
#include "refract/model.hpp"

namespace refract {

struct DividendQuery {
    double x = 0.0;
    double q = 0.0;  // must be > 0
    RefractionConfig refraction;
};

struct PastingReport {
    double left_deriv = 0.0;   // V'(b-)
    double right_deriv = 0.0;  // V'(b+)
    double gap = 0.0;          // right - left
    double condition_residual = 0.0;
    bool condition_holds = false;
};

// Net present value of the dividends paid out above the threshold until ruin.
IdentityResult dividend_value(const LevyModel& m, const DividendQuery& query);

// Same value by partial fractions; hyper-exponential models only.
IdentityResult dividend_value_hyperexp(const LevyModel& m, const DividendQuery& query);

// P_x(U jumps from B into A at ruin) for intervals A in (-inf, 0), B in [0, inf).
// Requires 0 < delta < psi'(0+). Pass infinite edges for full-space masses.
double overshoot_undershoot(const LevyModel& m, double x, const RefractionConfig& r,
                            double a_lo, double a_hi, double b_lo, double b_hi);

// One-sided derivatives of the dividend value at the threshold.
PastingReport smooth_pasting_gap(const LevyModel& m, const RefractionConfig& r, double q,
                                 double tol = 1e-9);

// Ruin probability of the refracted stable-with-drift model in closed form.
double ruin_probability_stable(double x, double b, double c, double delta, double alpha);

}  // namespace refract
