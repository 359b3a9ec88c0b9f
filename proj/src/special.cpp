#include "refract/special.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

#include "refract/errors.hpp"

namespace refract {

namespace {

// The alternating series loses ~|z|^{1/beta} digits to cancellation, so switch
// to the spectral representation early.
constexpr double kSwitchRadius = 2.0;

double series(double beta, double z, int deriv) {
    // E_beta(z) = sum z^n / Gamma(beta n + 1); deriv differentiates termwise.
    double sum = deriv == 0 ? 1.0 / std::tgamma(1.0) : 1.0 / std::tgamma(beta + 1.0);
    double zp = 1.0;
    for (int n = 1; n < 400; ++n) {
        zp *= z;
        double term;
        if (deriv == 0) {
            term = zp / std::tgamma(beta * n + 1.0);
        } else {
            term = (n + 1.0) * zp / std::tgamma(beta * (n + 1.0) + 1.0);
        }
        sum += term;
        if (std::abs(term) < 1e-17 * std::max(1.0, std::abs(sum)) && n > 4) return sum;
    }
    throw NumericalError("mittag_leffler series failed to converge");
}

// Spectral density of E_beta(-x) on (0, infinity).
double spectral_density(double beta, double s) {
    double sb = std::pow(s, beta);
    double denom = sb * sb + 2.0 * sb * std::cos(beta * M_PI) + 1.0;
    return std::sin(beta * M_PI) / M_PI * std::pow(s, beta - 1.0) / denom;
}

// The completely monotone representation is in the stretched variable:
// E_beta(-t^beta) = int_0^infty e^{-r t} K_beta(r) dr, so evaluate at t = x^{1/beta}.
// deriv = 0 returns E_beta(-x); deriv = 1 returns dE_beta/dz at z = -x.
double spectral(double beta, double x, int deriv) {
    double t = std::pow(x, 1.0 / beta);
    auto f = [&](double r) {
        double w = deriv == 0 ? 1.0 : r;
        return w * std::exp(-r * t) * spectral_density(beta, r);
    };
    boost::math::quadrature::tanh_sinh<double> ts;
    boost::math::quadrature::exp_sinh<double> es;
    double a = ts.integrate(f, 0.0, 1.0, 1e-12);
    double b = es.integrate([&](double r) { return f(1.0 + r); }, 1e-12);
    double integral = a + b;
    if (deriv == 0) return integral;
    return std::pow(x, 1.0 / beta - 1.0) / beta * integral;
}

void check_domain(double beta, double z) {
    if (!(beta > 0.0 && beta < 1.0))
        throw NumericalError("mittag_leffler: beta must lie in (0,1)");
    if (z > 0.0) throw NumericalError("mittag_leffler: z must be <= 0");
}

}  // namespace

double mittag_leffler(double beta, double z) {
    check_domain(beta, z);
    if (z == 0.0) return 1.0;
    if (-z <= kSwitchRadius) return series(beta, z, 0);
    return spectral(beta, -z, 0);
}

double mittag_leffler_deriv(double beta, double z) {
    check_domain(beta, z);
    if (-z <= kSwitchRadius) return series(beta, z, 1);
    return spectral(beta, -z, 1);
}

}  // namespace refract
