#pragma once

#include <complex>
#include <variant>
#include <vector>

#include "refract/errors.hpp"

namespace refract {

// Jump structure of the driver. The Levy measure lives on (0, infinity);
// a jump of size s moves the path down by s.
struct NoJumps {};

// Compound Poisson at rate lambda with claim density sum_k A_k alpha_k e^{-alpha_k s},
// i.e. a mixture of exponentials. Laplace exponent contribution:
//   -lambda + lambda sum_k A_k alpha_k / (alpha_k + theta).
struct HyperExp {
    double lambda = 0.0;
    std::vector<double> weights;  // A_k, sum to 1
    std::vector<double> rates;    // alpha_k, distinct, positive
};

// Spectrally negative stable jump part, index alpha in (1,2), normalised so the
// jump contribution to the Laplace exponent is theta^alpha (see LevyModel notes).
struct StableTail {
    double alpha = 0.0;
};

using JumpSpec = std::variant<NoJumps, HyperExp, StableTail>;

// Spectrally negative Levy model. The Laplace exponent psi(theta) = log E e^{theta X_1} is
//   NoJumps:    c theta + sigma^2 theta^2 / 2
//   HyperExp:   c theta + sigma^2 theta^2 / 2 - lambda + lambda sum A_k alpha_k/(alpha_k+theta)
//   StableTail: c theta + theta^alpha            (fully compensated jumps, so E X_1 = c)
// where c = drift_c(). For hyper-exponential jumps c is the natural drift of the
// bounded-variation decomposition c t - S_t, related to the triplet drift gamma by
// c = gamma + int_{(0,1)} x Pi(dx). Models are constructed through the factories
// below so that c is held exactly.
class LevyModel {
  public:
    static LevyModel compound_poisson(double c, HyperExp jumps, double sigma = 0.0);
    static LevyModel brownian(double gamma, double sigma);
    static LevyModel stable_with_drift(double c, double alpha);
    // Triplet form: gamma is the drift of the small-jump-compensated decomposition.
    static LevyModel from_triplet(double gamma, double sigma, JumpSpec jumps);

    double gamma() const { return gamma_; }
    double sigma() const { return sigma_; }
    const JumpSpec& jumps() const { return jumps_; }

    double drift_c() const { return c_; }
    bool bounded_variation() const;
    bool has_hyperexp_jumps() const { return std::holds_alternative<HyperExp>(jumps_); }
    bool has_stable_jumps() const { return std::holds_alternative<StableTail>(jumps_); }

    // Total jump arrival rate (finite activity only).
    double jump_rate() const;

  private:
    LevyModel() = default;
    void validate() const;

    double gamma_ = 0.0;
    double sigma_ = 0.0;
    double c_ = 0.0;  // cached natural drift
    JumpSpec jumps_;
};

struct RefractionConfig {
    double delta = 0.0;  // drift removed above the threshold
    double b = 0.0;      // threshold level
};

// psi(theta), analytically continued to theta > -min alpha_k for hyper-exponential jumps.
double laplace_exponent(const LevyModel& m, double theta);
std::complex<double> laplace_exponent(const LevyModel& m, std::complex<double> theta);
double psi_prime(const LevyModel& m, double theta);
double psi_second(const LevyModel& m, double theta);

// E(X_1) = psi'(0+).
double mean(const LevyModel& m);

// Largest nonnegative root of psi(theta) - delta*theta = q. delta = 0 gives Phi(q).
double phi_inverse(const LevyModel& m, double delta, double q);

// Throws HypothesisHViolation / NonPositiveDelta when (H) fails.
void validate_refraction(const LevyModel& m, const RefractionConfig& r);

}  // namespace refract
