#pragma once

#include <variant>
#include <vector>

#include "refract/model.hpp"

namespace refract {

// Closed form W_delta^{(q)}(x) = sum_i D_i e^{theta_i x} for models whose Laplace
// transform 1/(psi(beta) - delta beta - q) is rational: theta_i are the roots of
// psi(theta) - delta theta = q (theta_0 the largest) and D_i = 1/(psi'(theta_i) - delta).
struct RationalScale {
    std::vector<double> roots;
    std::vector<double> coeffs;
};

// q = 0 scale function of the drift-reduced stable model:
// W(x) = (1/cd) (1 - E_{alpha-1}(-cd x^{alpha-1})) with cd = c - delta.
struct MittagLefflerScale {
    double alpha = 0.0;
    double cd = 0.0;
};

// Numerically inverted transform on a uniform mesh of [0, x_max].
struct TabulatedScale {
    double x_max = 0.0;
    double h = 0.0;
    std::vector<double> w, wp, wpp;
    std::vector<double> zcum;  // int_0^{x_i} W
    bool has_second = false;
    double inversion_error = 0.0;  // max over the mesh of the Talbot self-check
};

struct TabulationOptions {
    double x_max = 40.0;
    int mesh = 4096;
    double tol = 1e-6;      // on the Talbot self-check
    bool parallel = true;   // OpenMP over mesh points; serial path kept for testing
};

// Evaluable representation of the q-scale function of X - delta*t (delta = 0 gives
// the scale function of X itself). Immutable after construction, thread-safe to read.
class ScaleFunction {
  public:
    static ScaleFunction make(const LevyModel& m, double delta, double q,
                              const TabulationOptions& opts = {});
    static ScaleFunction closed_form(const LevyModel& m, double delta, double q);
    static ScaleFunction stable_zero_q(const LevyModel& m, double delta);
    static ScaleFunction tabulated(const LevyModel& m, double delta, double q,
                                   const TabulationOptions& opts);

    double w(double x) const;
    double w_prime(double x) const;
    double w_second(double x) const;  // throws SecondDerivativeUnavailable
    double z(double x) const;         // Z^{(q)}(x) = 1 + q int_0^x W^{(q)}

    double q() const { return q_; }
    double delta() const { return delta_; }
    double phi() const { return phi_; }  // largest root of psi(theta) - delta theta = q
    const LevyModel& model() const { return *model_; }

    bool is_rational() const { return std::holds_alternative<RationalScale>(rep_); }
    const RationalScale& rational() const { return std::get<RationalScale>(rep_); }
    bool is_tabulated() const { return std::holds_alternative<TabulatedScale>(rep_); }
    const TabulatedScale& table() const { return std::get<TabulatedScale>(rep_); }

    // int_b^infty e^{-rate y} (d/dy)^deriv W(y) dy for rate strictly above the top
    // root: exact sums for rational representations, tilted truncation otherwise.
    // deriv in {0,1,2}; higher derivatives reduce by integration by parts.
    double tail_transform(double rate, double b, int deriv = 0) const;

  private:
    ScaleFunction() = default;

    const LevyModel* model_ = nullptr;
    double delta_ = 0.0;
    double q_ = 0.0;
    double phi_ = 0.0;
    std::variant<RationalScale, MittagLefflerScale, TabulatedScale> rep_;
};

// All roots and coefficients of the rational transform (Example-2 style partial
// fractions). Throws RootSeparationFailure on (near-)coincident roots.
RationalScale hyperexp_partial_fractions(const LevyModel& m, double delta, double q);

// Talbot inversion of beta -> 1/(psi(beta) - delta beta - q), tilted by phi so the
// inverted function is bounded.
TabulatedScale invert_laplace_scale(const LevyModel& m, double delta, double q,
                                    const TabulationOptions& opts);

// Spec-level convenience wrappers.
double scale_w(const LevyModel& m, double q, double x);
double scale_z(const LevyModel& m, double q, double x);
double scale_w_deriv(const LevyModel& m, double q, double x, int order);
double refracted_scale(const LevyModel& m, const RefractionConfig& r, double q, double x);

}  // namespace refract
