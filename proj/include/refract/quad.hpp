#pragma once

#include <functional>

namespace refract {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

// Adaptive 15-point Gauss-Kronrod on [a, b]. Open rule, so integrable endpoint
// behaviour and scale-function kinks at the endpoints are harmless.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol = 1e-9);

// Integral over [a, infinity) of an integrand known to decay at least like
// e^{-decay_rate (x - a)} with prefactor bound `bound`: truncates where the tail
// bound drops below tail_tol and integrates the finite piece adaptively.
QuadResult integrate_decaying(const std::function<double(double)>& f, double a,
                              double decay_rate, double bound, double tail_tol = 1e-12,
                              double abs_tol = 1e-9);

}  // namespace refract
