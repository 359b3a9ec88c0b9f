#pragma once

#include <functional>
#include <string>
#include <vector>

#include "refract/model.hpp"
#include "refract/scale.hpp"

namespace refract {

struct ExitQuery {
    double x = 0.0;  // start level
    double a = 0.0;  // upper level
    double q = 0.0;  // discount rate
    RefractionConfig refraction;
};

struct IdentityResult {
    double value = 0.0;
    double quadrature_error = 0.0;
    std::string method;  // "closed-form", "quadrature" or "numeric-limit"
};

// Evaluable resolvent density y -> u^{(q)}(x, y) on a window, plus an interval
// mass integrator. The density function it holds is self-contained (owns copies
// of the scale functions), so the object can outlive the evaluator that made it.
struct ResolventDensity {
    double x = 0.0;
    double q = 0.0;
    double lo = 0.0;  // window lower edge (-inf allowed)
    double hi = 0.0;  // window upper edge (+inf allowed)
    std::function<double(double)> density;
    std::vector<double> breakpoints;  // kinks of the density, for the integrator
    double decay_up = 1.0;            // exponential decay rate toward +inf
    double decay_down = 1.0;          // exponential decay rate toward -inf

    // integral of the density over [c, d] intersected with the window
    double mass(double c, double d) const;
    double total_mass() const { return mass(lo, hi); }
};

// Shared evaluation context: scale functions of the driving process X and of the
// refracted drift process Y = X - delta t, both at the same discount q.
class RefractedEvaluator {
  public:
    RefractedEvaluator(const LevyModel& m, const RefractionConfig& r, double q,
                       const TabulationOptions& opts = {});

    // W^{(q)}(x - s) + delta 1{x>=b} int_b^x WW^{(q)}(x-z) W^{(q)'}(z-s) dz
    double refracted_w(double x, double shift = 0.0) const;
    // Z^{(q)}(x) + delta q 1{x>=b} int_b^x WW^{(q)}(x-y) W^{(q)}(y) dy
    double refracted_z(double x) const;
    // e^{Phi x} + delta Phi 1{x>=b} int_b^x e^{Phi z} WW^{(q)}(x-z) dz
    double refracted_exp(double x) const;

    const ScaleFunction& scale_x() const { return wx_; }
    const ScaleFunction& scale_y() const { return wy_; }
    double big_phi() const { return wx_.phi(); }    // Phi(q), right inverse for X
    double small_phi() const { return wy_.phi(); }  // varphi(q), right inverse for Y
    const LevyModel& model() const { return *model_; }
    const RefractionConfig& refraction() const { return refr_; }
    double q() const { return q_; }

  private:
    const LevyModel* model_;
    RefractionConfig refr_;
    double q_;
    ScaleFunction wx_;  // scale function of X
    ScaleFunction wy_;  // scale function of Y
};

// Exit problems for the refracted process U.
IdentityResult two_sided_up(const LevyModel& m, const ExitQuery& query);
IdentityResult two_sided_down(const LevyModel& m, const ExitQuery& query);
IdentityResult one_sided_up(const LevyModel& m, double x, double a, double q,
                            const RefractionConfig& r);
IdentityResult one_sided_down(const LevyModel& m, double x, double q,
                              const RefractionConfig& r);

// P_x(ruin ever happens); requires 0 < delta < psi'(0+), otherwise throws
// DriftNotDominating (ruin is then certain).
IdentityResult ruin_probability(const LevyModel& m, double x, const RefractionConfig& r);

// Resolvent densities of U killed at the indicated exits.
ResolventDensity resolvent_two_sided(const LevyModel& m, double x, double a, double q,
                                     const RefractionConfig& r);
ResolventDensity resolvent_killed_below(const LevyModel& m, double x, double q,
                                        const RefractionConfig& r);
ResolventDensity resolvent_killed_above(const LevyModel& m, double x, double a, double q,
                                        const RefractionConfig& r);
ResolventDensity resolvent_free(const LevyModel& m, double x, double q,
                                const RefractionConfig& r);

// E_x[e^{-q kappa_0^-}; U hits 0 continuously]; exactly zero when sigma = 0.
IdentityResult creeping(const LevyModel& m, double x, double q, const RefractionConfig& r);

// Residual |LHS - RHS| of the convolution identity tying the two scale functions
// together over the jump measure; bounded-variation models with c > delta only.
double verify_key_identity(const LevyModel& m, const RefractionConfig& r, double q,
                           double u, double v, double mlev);

// Classical (unrefracted) identities for X, used as delta = 0 oracles.
double classical_two_sided(const LevyModel& m, double x, double a, double q);
ResolventDensity classical_resolvent(const LevyModel& m, double x, double a, double q);
double classical_overshoot(const LevyModel& m, double x, double a, double q,
                           const std::function<double(double)>& f,
                           const std::function<double(double)>& g);

}  // namespace refract
