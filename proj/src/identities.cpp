#include "refract/identities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "refract/errors.hpp"
#include "refract/quad.hpp"

namespace refract {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Truncation window for semi-infinite mass integrals: integrate an extra
// log(1/kMassTail)/decay beyond the last structural breakpoint.
constexpr double kMassTail = 1e-12;

// Slowest decay rate of the density toward -infinity: the most negative root of
// the rational transform if available, otherwise a conservative default.
// Slowest downward decay rate: the negative root closest to zero dominates the
// tail, so it governs where the mass integration may be truncated.
double downward_decay(const ScaleFunction& s) {
    if (!s.is_rational()) return 0.5;
    double r = -std::numeric_limits<double>::infinity();
    for (double th : s.rational().roots)
        if (th < 0.0) r = std::max(r, th);
    return std::isfinite(r) ? -r : 0.5;
}

}  // namespace

RefractedEvaluator::RefractedEvaluator(const LevyModel& m, const RefractionConfig& r,
                                       double q, const TabulationOptions& opts)
    : model_(&m),
      refr_(r),
      q_(q),
      wx_(ScaleFunction::make(m, 0.0, q, opts)),
      wy_(ScaleFunction::make(m, r.delta, q, opts)) {
    validate_refraction(m, r);
    if (r.b < 0.0) throw ModelError("refraction threshold must be nonnegative");
}

double RefractedEvaluator::refracted_w(double x, double shift) const {
    double base = wx_.w(x - shift);
    double b = refr_.b;
    if (x < b || refr_.delta == 0.0) return base;
    auto f = [&](double z) { return wy_.w(x - z) * wx_.w_prime(z - shift); };
    return base + refr_.delta * integrate(f, b, x).value;
}

double RefractedEvaluator::refracted_z(double x) const {
    double base = wx_.z(x);
    double b = refr_.b;
    if (x < b || refr_.delta == 0.0 || q_ == 0.0) return base;
    auto f = [&](double y) { return wy_.w(x - y) * wx_.w(y); };
    return base + refr_.delta * q_ * integrate(f, b, x).value;
}

double RefractedEvaluator::refracted_exp(double x) const {
    double phi = wx_.phi();
    double base = std::exp(phi * x);
    double b = refr_.b;
    if (x < b || refr_.delta == 0.0 || phi == 0.0) return base;
    auto f = [&](double z) { return std::exp(phi * z) * wy_.w(x - z); };
    return base + refr_.delta * phi * integrate(f, b, x).value;
}

IdentityResult two_sided_up(const LevyModel& m, const ExitQuery& query) {
    if (query.x < 0.0 || query.x > query.a || query.refraction.b > query.a)
        throw ModelError("two_sided_up needs 0 <= x, b <= a");
    if (query.x == query.a) return {1.0, 0.0, "closed-form"};
    RefractedEvaluator ev(m, query.refraction, query.q);
    double num = ev.refracted_w(query.x);
    double den = ev.refracted_w(query.a);
    return {num / den, 1e-9, "quadrature"};
}

IdentityResult two_sided_down(const LevyModel& m, const ExitQuery& query) {
    if (query.x < 0.0 || query.x > query.a || query.refraction.b > query.a)
        throw ModelError("two_sided_down needs 0 <= x, b <= a");
    RefractedEvaluator ev(m, query.refraction, query.q);
    double ratio = ev.refracted_z(query.a) / ev.refracted_w(query.a);
    double v = ev.refracted_z(query.x) - ratio * ev.refracted_w(query.x);
    return {v, 1e-9, "quadrature"};
}

IdentityResult one_sided_up(const LevyModel& m, double x, double a, double q,
                            const RefractionConfig& r) {
    if (x > a || r.b > a) throw ModelError("one_sided_up needs x, b <= a");
    if (x == a) return {1.0, 0.0, "closed-form"};
    RefractedEvaluator ev(m, r, q);
    return {ev.refracted_exp(x) / ev.refracted_exp(a), 1e-9, "quadrature"};
}

IdentityResult one_sided_down(const LevyModel& m, double x, double q,
                              const RefractionConfig& r) {
    if (x < 0.0 || r.b < 0.0) throw ModelError("one_sided_down needs x, b >= 0");
    if (q <= 0.0) throw ModelError("one_sided_down needs q > 0");
    RefractedEvaluator ev(m, r, q);
    double phi = ev.small_phi();
    double t0 = ev.scale_x().tail_transform(phi, r.b, 0);
    double t1 = ev.scale_x().tail_transform(phi, r.b, 1);
    double v = ev.refracted_z(x) - q * t0 / t1 * ev.refracted_w(x);
    return {v, 1e-9, "quadrature"};
}

IdentityResult ruin_probability(const LevyModel& m, double x, const RefractionConfig& r) {
    if (x < 0.0) throw ModelError("ruin_probability needs x >= 0");
    double drift = mean(m);
    if (!(r.delta > 0.0) || r.delta >= drift) throw DriftNotDominating(drift, r.delta);
    RefractedEvaluator ev(m, r, 0.0);
    double wb = ev.scale_x().w(r.b);
    double v = 1.0 - (drift - r.delta) / (1.0 - r.delta * wb) * ev.refracted_w(x);
    return {v, 1e-9, "closed-form"};
}

double ResolventDensity::mass(double c, double d) const {
    double c2 = std::max(c, lo), d2 = std::min(d, hi);
    if (!(c2 < d2)) return 0.0;
    // structural breakpoints where the density has kinks
    std::vector<double> cut = {c2, d2};
    for (double p : breakpoints)
        if (p > c2 && p < d2) cut.push_back(p);
    // truncate infinite ends where the exponential tails are negligible
    if (d2 == kInf) {
        double start = x;
        for (double p : breakpoints) start = std::max(start, p);
        cut.erase(std::remove(cut.begin(), cut.end(), kInf), cut.end());
        double cap = std::max(c2, start) + std::log(1.0 / kMassTail) / decay_up;
        cut.push_back(cap);
        d2 = cap;
    }
    if (c2 == -kInf) {
        double start = std::min(0.0, x);
        for (double p : breakpoints) start = std::min(start, p);
        cut.erase(std::remove(cut.begin(), cut.end(), -kInf), cut.end());
        double cap = std::min(d2, start) - std::log(1.0 / kMassTail) / decay_down;
        cut.push_back(cap);
    }
    std::sort(cut.begin(), cut.end());
    double total = 0.0;
    for (size_t i = 0; i + 1 < cut.size(); ++i) {
        // chunk long tail stretches so the adaptive rule converges locally
        double seg_lo = cut[i], seg_hi = cut[i + 1];
        int chunks = std::max(1, static_cast<int>(std::ceil((seg_hi - seg_lo) / 4.0)));
        for (int c3 = 0; c3 < chunks; ++c3) {
            double u0 = seg_lo + (seg_hi - seg_lo) * c3 / chunks;
            double u1 = seg_lo + (seg_hi - seg_lo) * (c3 + 1) / chunks;
            total += integrate(density, u0, u1, 1e-8).value;
        }
    }
    return total;
}

ResolventDensity resolvent_two_sided(const LevyModel& m, double x, double a, double q,
                                     const RefractionConfig& r) {
    if (x < 0.0 || x > a || r.b > a)
        throw ModelError("resolvent_two_sided needs 0 <= x, b <= a");
    auto ev = std::make_shared<RefractedEvaluator>(m, r, q);
    double ratio = ev->refracted_w(x) / ev->refracted_w(a);
    double b = r.b;
    ResolventDensity d;
    d.x = x;
    d.q = q;
    d.lo = 0.0;
    d.hi = a;
    d.breakpoints = {b, x};
    d.density = [ev, ratio, a, b, x](double y) {
        if (y < 0.0 || y > a) return 0.0;
        if (y >= b)
            return ratio * ev->scale_y().w(a - y) - ev->scale_y().w(x - y);
        return ratio * ev->refracted_w(a, y) - ev->refracted_w(x, y);
    };
    return d;
}

ResolventDensity resolvent_killed_below(const LevyModel& m, double x, double q,
                                        const RefractionConfig& r) {
    if (x < 0.0 || r.b < 0.0) throw ModelError("resolvent_killed_below needs x, b >= 0");
    if (q <= 0.0) throw ModelError("resolvent_killed_below needs q > 0");
    auto ev = std::make_shared<RefractedEvaluator>(m, r, q);
    double phi = ev->small_phi();
    double t1 = ev->scale_x().tail_transform(phi, r.b, 1);
    double wx = ev->refracted_w(x);
    double b = r.b;
    ResolventDensity d;
    d.x = x;
    d.q = q;
    d.lo = 0.0;
    d.hi = kInf;
    d.decay_up = phi;
    d.breakpoints = {b, x};
    d.density = [ev, phi, t1, wx, b, x, delta = r.delta](double y) {
        if (y < 0.0) return 0.0;
        if (y >= b)
            return wx / (delta * t1) * std::exp(-phi * y) - ev->scale_y().w(x - y);
        double t1y = std::exp(-phi * y) * ev->scale_x().tail_transform(phi, b - y, 1);
        return t1y / t1 * wx - ev->refracted_w(x, y);
    };
    return d;
}

// For rational scale functions and y <= min(t, b):
//   refracted_w(t, y) = sum_i c_i e^{-theta_i y},  c_i = D_i g_i,
//   g_i = e^{theta_i t} + delta theta_i int_b^t WW(t - z) e^{theta_i z} dz.
std::vector<double> shifted_w_coeffs(const RefractedEvaluator& ev, double t) {
    const auto& rat = ev.scale_x().rational();
    double b = ev.refraction().b, delta = ev.refraction().delta;
    std::vector<double> c(rat.roots.size());
    for (size_t i = 0; i < c.size(); ++i) {
        double th = rat.roots[i];
        double gi = std::exp(th * t);
        if (t >= b && delta > 0.0) {
            auto f = [&](double z) { return ev.scale_y().w(t - z) * std::exp(th * z); };
            gi += delta * th * integrate(f, b, t).value;
        }
        c[i] = rat.coeffs[i] * gi;
    }
    return c;
}

ResolventDensity resolvent_killed_above(const LevyModel& m, double x, double a, double q,
                                        const RefractionConfig& r) {
    if (x > a || r.b > a) throw ModelError("resolvent_killed_above needs x, b <= a");
    auto ev = std::make_shared<RefractedEvaluator>(m, r, q);
    double ratio = ev->refracted_exp(x) / ev->refracted_exp(a);
    double b = r.b;
    ResolventDensity d;
    d.x = x;
    d.q = q;
    d.lo = -kInf;
    d.hi = a;
    d.decay_down = downward_decay(ev->scale_x());
    d.breakpoints = {b, x, 0.0};
    // The downward tail is a difference of terms that both grow like e^{-Phi y};
    // in the rational case drop the identically-cancelling Phi-coefficient so
    // the tail is evaluated without cancellation.
    auto tail_coeffs = std::make_shared<std::vector<double>>();
    if (ev->scale_x().is_rational()) {
        auto ca = shifted_w_coeffs(*ev, a);
        auto cx = shifted_w_coeffs(*ev, x);
        for (size_t i = 0; i < ca.size(); ++i)
            tail_coeffs->push_back(ratio * ca[i] - cx[i]);
        (*tail_coeffs)[0] = 0.0;
    }
    d.density = [ev, ratio, a, b, x, tail_coeffs](double y) {
        if (y > a) return 0.0;
        if (y >= b)
            return ratio * ev->scale_y().w(a - y) - ev->scale_y().w(x - y);
        if (!tail_coeffs->empty() && y <= std::min(b, x)) {
            const auto& roots = ev->scale_x().rational().roots;
            double s = 0.0;
            for (size_t i = 1; i < roots.size(); ++i)
                s += (*tail_coeffs)[i] * std::exp(-roots[i] * y);
            return s;
        }
        return ratio * ev->refracted_w(a, y) - ev->refracted_w(x, y);
    };
    return d;
}

ResolventDensity resolvent_free(const LevyModel& m, double x, double q,
                                const RefractionConfig& r) {
    if (q <= 0.0) throw ModelError("resolvent_free needs q > 0");
    auto ev = std::make_shared<RefractedEvaluator>(m, r, q);
    double bphi = ev->big_phi();
    double phi = ev->small_phi();
    double b = r.b;
    double lead = std::exp(-bphi * b) * ev->refracted_exp(x);
    ResolventDensity d;
    d.x = x;
    d.q = q;
    d.lo = -kInf;
    d.hi = kInf;
    d.decay_up = phi;
    d.decay_down = downward_decay(ev->scale_x());
    d.breakpoints = {b, x, 0.0};
    // As in resolvent_killed_above: closed-form downward tail with the
    // identically-cancelling Phi-coefficient removed.
    auto tail_coeffs = std::make_shared<std::vector<double>>();
    if (ev->scale_x().is_rational()) {
        const auto& rat = ev->scale_x().rational();
        auto cx = shifted_w_coeffs(*ev, x);
        double C = lead * (phi - bphi) / bphi;
        for (size_t i = 0; i < rat.roots.size(); ++i)
            tail_coeffs->push_back(C * rat.coeffs[i] * rat.roots[i] *
                                       std::exp(rat.roots[i] * b) /
                                       (phi - rat.roots[i]) -
                                   cx[i]);
        (*tail_coeffs)[0] = 0.0;
    }
    d.density = [ev, lead, bphi, phi, b, x, delta = r.delta, tail_coeffs](double y) {
        if (y >= b)
            return lead * (phi - bphi) / (delta * bphi) * std::exp(-phi * (y - b)) -
                   ev->scale_y().w(x - y);
        if (!tail_coeffs->empty() && y <= std::min(b, x)) {
            const auto& roots = ev->scale_x().rational().roots;
            double s = 0.0;
            for (size_t i = 1; i < roots.size(); ++i)
                s += (*tail_coeffs)[i] * std::exp(-roots[i] * y);
            return s;
        }
        double t1y = std::exp(-phi * y) * ev->scale_x().tail_transform(phi, b - y, 1);
        return lead * (phi - bphi) / bphi * std::exp(phi * b) * t1y -
               ev->refracted_w(x, y);
    };
    return d;
}

IdentityResult creeping(const LevyModel& m, double x, double q, const RefractionConfig& r) {
    if (x < 0.0 || r.b < 0.0) throw ModelError("creeping needs x, b >= 0");
    if (q <= 0.0) throw ModelError("creeping needs q > 0");
    if (m.sigma() == 0.0) return {0.0, 0.0, "closed-form"};
    RefractedEvaluator ev(m, r, q);
    double phi = ev.small_phi();
    double b = r.b;
    double t1 = ev.scale_x().tail_transform(phi, b, 1);
    double t2 = ev.scale_x().tail_transform(phi, b, 2);
    double head = ev.scale_x().w_prime(x);
    if (x >= b && r.delta > 0.0) {
        auto f = [&](double z) { return ev.scale_y().w(x - z) * ev.scale_x().w_second(z); };
        head += r.delta * integrate(f, b, x).value;
    }
    double v = 0.5 * m.sigma() * m.sigma() * (head - t2 / t1 * ev.refracted_w(x));
    return {v, 1e-9, "quadrature"};
}

double verify_key_identity(const LevyModel& m, const RefractionConfig& r, double q,
                           double u, double v, double mlev) {
    if (!(v >= u && u > mlev && mlev >= 0.0))
        throw ModelError("key identity needs v >= u > m >= 0");
    if (!m.bounded_variation() || !m.has_hyperexp_jumps())
        throw ModelError("key identity needs a bounded-variation hyper-exponential model");
    validate_refraction(m, r);
    const auto& j = std::get<HyperExp>(m.jumps());
    auto wx = ScaleFunction::make(m, 0.0, q);
    auto wy = ScaleFunction::make(m, r.delta, q);
    const auto& rat = wx.rational();

    // inner(z) = int_{(z, z+m]} W(z - t + m) Pi(dt)
    //          = lambda sum_k A_k alpha_k e^{-alpha_k (z+m)} int_0^m e^{alpha_k s} W(s) ds
    std::vector<double> coef(j.rates.size());
    for (size_t k = 0; k < j.rates.size(); ++k) {
        double ak = j.rates[k];
        double s = 0.0;
        for (size_t i = 0; i < rat.roots.size(); ++i)
            s += rat.coeffs[i] * (std::exp((ak + rat.roots[i]) * mlev) - 1.0) /
                 (ak + rat.roots[i]);
        coef[k] = j.lambda * j.weights[k] * ak * s;
    }
    double wvm = wy.w(v - mlev);
    double wum = wy.w(u - mlev);
    auto lhs_f = [&](double z) {
        double inner = 0.0;
        for (size_t k = 0; k < j.rates.size(); ++k)
            inner += coef[k] * std::exp(-j.rates[k] * (z + mlev));
        double bracket = wy.w(v - mlev - z) / wvm * wum - wy.w(u - mlev - z);
        return inner * bracket;
    };
    // W(u - m - z) jumps by W(0+) at z = u - m in bounded variation; split there
    double lhs = integrate(lhs_f, 0.0, u - mlev).value +
                 integrate(lhs_f, u - mlev, v - mlev).value;

    auto refr = [&](double t) {
        auto f = [&](double z) { return wy.w(t - z) * wx.w_prime(z); };
        return wx.w(t) + r.delta * integrate(f, mlev, t).value;
    };
    double rhs = -wum / wvm * refr(v) + refr(u);
    return std::abs(lhs - rhs);
}

double classical_two_sided(const LevyModel& m, double x, double a, double q) {
    if (x > a) throw ModelError("classical_two_sided needs x <= a");
    if (x < 0.0) return 0.0;
    if (x == a) return 1.0;
    auto s = ScaleFunction::make(m, 0.0, q);
    return s.w(x) / s.w(a);
}

ResolventDensity classical_resolvent(const LevyModel& m, double x, double a, double q) {
    if (x < 0.0 || x > a) throw ModelError("classical_resolvent needs 0 <= x <= a");
    auto s = std::make_shared<ScaleFunction>(ScaleFunction::make(m, 0.0, q));
    double ratio = s->w(x) / s->w(a);
    ResolventDensity d;
    d.x = x;
    d.q = q;
    d.lo = 0.0;
    d.hi = a;
    d.breakpoints = {x};
    d.density = [s, ratio, a, x](double y) {
        if (y < 0.0 || y > a) return 0.0;
        return ratio * s->w(a - y) - s->w(x - y);
    };
    return d;
}

double classical_overshoot(const LevyModel& m, double x, double a, double q,
                           const std::function<double(double)>& f,
                           const std::function<double(double)>& g) {
    if (!m.has_hyperexp_jumps())
        throw ModelError("overshoot functional needs hyper-exponential jumps");
    if (m.sigma() > 0.0 && f(0.0) * g(0.0) != 0.0)
        throw ModelError("overshoot functional needs f(0)g(0) = 0 unless paths have "
                         "bounded variation");
    const auto& j = std::get<HyperExp>(m.jumps());
    auto res = classical_resolvent(m, x, a, q);
    double amin = *std::min_element(j.rates.begin(), j.rates.end());
    auto h = [&](double y) {
        // int_{(y,inf)} f(y - t) Pi(dt) with the substitution t = y + s
        auto inner = [&](double s) {
            double p = 0.0;
            for (size_t k = 0; k < j.rates.size(); ++k)
                p += j.lambda * j.weights[k] * j.rates[k] *
                     std::exp(-j.rates[k] * (y + s)) * f(-s);
            return p;
        };
        double in = integrate_decaying(inner, 0.0, amin, j.lambda + 1.0).value;
        return g(y) * res.density(y) * in;
    };
    // split at the kink of the resolvent density at y = x
    double total = integrate(h, 0.0, std::min(x, a)).value;
    if (x < a) total += integrate(h, x, a).value;
    return total;
}

}  // namespace refract
