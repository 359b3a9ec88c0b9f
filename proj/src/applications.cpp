#include "refract/applications.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "refract/errors.hpp"
#include "refract/quad.hpp"
#include "refract/special.hpp"

namespace refract {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// varphi(q) int_0^inf e^{-varphi(q) y} W^{(q)'}(y + b) dy, the denominator of the
// dividend formula.
double dividend_denominator(const RefractedEvaluator& ev) {
    double phi = ev.small_phi();
    double b = ev.refraction().b;
    return phi * std::exp(phi * b) * ev.scale_x().tail_transform(phi, b, 1);
}

// Pi of the interval (l, r) for hyper-exponential jumps.
double pi_mass(const HyperExp& j, double l, double r) {
    double s = 0.0;
    for (size_t k = 0; k < j.rates.size(); ++k) {
        double t = std::exp(-j.rates[k] * l);
        if (r != kInf) t -= std::exp(-j.rates[k] * r);
        s += j.weights[k] * t;
    }
    return j.lambda * s;
}

}  // namespace

IdentityResult dividend_value(const LevyModel& m, const DividendQuery& query) {
    if (query.q <= 0.0) throw ModelError("dividend value needs q > 0");
    RefractedEvaluator ev(m, query.refraction, query.q);
    double den = dividend_denominator(ev);
    double head = query.refraction.delta / query.q *
                  (1.0 - ev.scale_y().z(query.x - query.refraction.b));
    return {head + ev.refracted_w(query.x) / den, 1e-9, "quadrature"};
}

IdentityResult dividend_value_hyperexp(const LevyModel& m, const DividendQuery& query) {
    if (query.q <= 0.0) throw ModelError("dividend value needs q > 0");
    if (!m.has_hyperexp_jumps() || m.sigma() > 0.0)
        throw ModelError("partial-fraction dividend value needs a pure "
                         "hyper-exponential model");
    validate_refraction(m, query.refraction);
    double x = query.x, b = query.refraction.b, delta = query.refraction.delta;
    auto wx = hyperexp_partial_fractions(m, 0.0, query.q);
    auto wy = hyperexp_partial_fractions(m, delta, query.q);
    size_t n = wx.roots.size();

    double den = 0.0;
    for (size_t i = 0; i < n; ++i)
        den += wy.roots[0] * wx.coeffs[i] * wx.roots[i] * std::exp(wx.roots[i] * b) /
               (wy.roots[0] - wx.roots[i]);

    if (x <= b) {
        double s = 0.0;
        for (size_t i = 0; i < n; ++i) s += wx.coeffs[i] * std::exp(wx.roots[i] * x);
        return {s / den, 0.0, "closed-form"};
    }
    double v = delta / query.q;
    for (size_t j = 0; j < n; ++j) {
        double cross = 0.0;
        for (size_t i = 0; i < n; ++i)
            cross += wy.coeffs[j] / (wy.roots[j] - wx.roots[i]) * wx.coeffs[i] *
                     wx.roots[i] * std::exp(wx.roots[i] * b);
        double curly = cross / den - wy.coeffs[j] / wy.roots[j];
        v += curly * delta * std::exp(wy.roots[j] * (x - b));
    }
    return {v, 0.0, "closed-form"};
}

double overshoot_undershoot(const LevyModel& m, double x, const RefractionConfig& r,
                            double a_lo, double a_hi, double b_lo, double b_hi) {
    if (!m.has_hyperexp_jumps())
        throw ModelError("overshoot law needs hyper-exponential jumps");
    if (!(a_hi <= 0.0 && a_lo < a_hi))
        throw ModelError("overshoot interval A must lie in (-inf, 0)");
    if (!(b_lo >= 0.0 && b_lo < b_hi))
        throw ModelError("undershoot interval B must lie in [0, inf)");
    double drift = mean(m);
    if (!(r.delta > 0.0) || r.delta >= drift) throw DriftNotDominating(drift, r.delta);

    const auto& j = std::get<HyperExp>(m.jumps());
    RefractedEvaluator ev(m, r, 0.0);
    double b = r.b;
    double wb = ev.scale_x().w(b);
    // Pi(y - A) = Pi((y - a_hi, y - a_lo))
    auto pi_shift = [&](double y) {
        return pi_mass(j, y - a_hi, a_lo == -kInf ? kInf : y - a_lo);
    };

    double amin = *std::min_element(j.rates.begin(), j.rates.end());
    auto piecewise = [&](const std::function<double(double)>& f, double lo, double hi,
                         std::initializer_list<double> cuts) {
        std::vector<double> p = {lo};
        for (double c : cuts)
            if (c > lo && c < hi) p.push_back(c);
        double total = 0.0;
        if (hi == kInf) {
            std::sort(p.begin(), p.end());
            for (size_t i = 0; i + 1 < p.size(); ++i)
                total += integrate(f, p[i], p[i + 1]).value;
            total += integrate_decaying(f, p.back(), amin, j.lambda + 1.0).value;
            return total;
        }
        p.push_back(hi);
        std::sort(p.begin(), p.end());
        for (size_t i = 0; i + 1 < p.size(); ++i)
            total += integrate(f, p[i], p[i + 1]).value;
        return total;
    };

    auto f1 = [&](double y) {
        return pi_shift(y) * (1.0 - r.delta * ev.scale_x().w(b - y)) /
               (1.0 - r.delta * wb);
    };
    double i1 = piecewise(f1, b_lo, b_hi, {b}) * ev.refracted_w(x);

    double i2 = 0.0;
    if (b_lo < std::min(b, b_hi)) {
        auto f2 = [&](double y) { return pi_shift(y) * ev.refracted_w(x, y); };
        i2 = piecewise(f2, b_lo, std::min(b, b_hi), {x});
    }

    double i3 = 0.0;
    double lo3 = std::max(b, b_lo);
    double hi3 = std::min(b_hi, x);  // WW(x - y) vanishes for y > x
    if (lo3 < hi3) {
        auto f3 = [&](double y) { return pi_shift(y) * ev.scale_y().w(x - y); };
        i3 = piecewise(f3, lo3, hi3, {});
    }
    return i1 - i2 - i3;
}

PastingReport smooth_pasting_gap(const LevyModel& m, const RefractionConfig& r, double q,
                                 double tol) {
    if (q <= 0.0) throw ModelError("smooth pasting diagnostic needs q > 0");
    RefractedEvaluator ev(m, r, q);
    double den = dividend_denominator(ev);
    double wpb = ev.scale_x().w_prime(r.b);
    double ww0 = ev.scale_y().w(0.0);
    PastingReport rep;
    rep.left_deriv = wpb / den;
    rep.gap = r.delta * ww0 * (wpb / den - 1.0);
    rep.right_deriv = rep.left_deriv + rep.gap;
    rep.condition_residual = den - wpb;
    rep.condition_holds = std::abs(rep.condition_residual) < tol;
    return rep;
}

double ruin_probability_stable(double x, double b, double c, double delta, double alpha) {
    if (!(alpha > 1.0 && alpha < 2.0)) throw ModelError("stable index must be in (1, 2)");
    if (!(delta > 0.0 && delta < c)) throw ModelError("stable ruin needs 0 < delta < c");
    if (x < 0.0 || b < 0.0) throw ModelError("stable ruin needs x, b >= 0");
    double beta = alpha - 1.0;
    double eb = mittag_leffler(beta, -c * std::pow(b, beta));
    double pref = (c - delta) / (c - delta + delta * eb);
    double brace = 1.0 - mittag_leffler(beta, -c * std::pow(x, beta));
    if (x >= b && x > 0.0) {
        // delta * int_b^x Wd(x-y) W'(y) dy with W(y) = (1 - E(-c y^beta))/c and
        // Wd the scale function at reduced drift c - delta; after t = y^beta this
        // is c*delta/(c-delta) int_{b^beta}^{x^beta} [1 - E(-(c-delta)(x-t^{1/beta})^beta)] E'(-ct) dt
        auto f = [&](double t) {
            double y = std::pow(t, 1.0 / beta);
            double inner = 1.0 - mittag_leffler(beta, -(c - delta) * std::pow(x - y, beta));
            return inner * mittag_leffler_deriv(beta, -c * t);
        };
        // Mittag-Leffler evaluations carry ~1e-9 absolute noise, so the adaptive
        // rule cannot certify much below that; the result is scaled by delta anyway.
        brace += c * delta / (c - delta) *
                 integrate(f, std::pow(b, beta), std::pow(x, beta), 1e-7).value;
    }
    return 1.0 - pref * brace;
}

}  // namespace refract
