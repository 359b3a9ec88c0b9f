#include "refract/quad.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "refract/errors.hpp"

namespace refract {

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol) {
    if (a == b) return {0.0, 0.0};
    double sign = 1.0;
    if (b < a) {
        std::swap(a, b);
        sign = -1.0;
    }
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    double err = 0.0;
    // boost uses a relative termination criterion; drive it hard and report the
    // estimated error against the absolute target.
    double v = GK::integrate(f, a, b, 15, 1e-12, &err);
    if (!std::isfinite(v)) throw QuadratureError("quadrature produced a non-finite value");
    if (err > std::max(abs_tol, 1e-10 * std::abs(v)) * 100.0)
        throw QuadratureError("quadrature error estimate " + std::to_string(err) +
                              " exceeds tolerance");
    return {sign * v, err};
}

QuadResult integrate_decaying(const std::function<double(double)>& f, double a,
                              double decay_rate, double bound, double tail_tol,
                              double abs_tol) {
    if (decay_rate <= 0.0)
        throw QuadratureError("integrate_decaying needs a positive decay rate");
    double width = std::log(std::max(bound, 1e-30) / tail_tol) / decay_rate;
    width = std::max(width, 1.0);
    QuadResult r = integrate(f, a, a + width, abs_tol);
    r.error += tail_tol / decay_rate;  // tail bound
    return r;
}

}  // namespace refract
