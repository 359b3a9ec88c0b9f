#include "refract/scale.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>

#include "refract/quad.hpp"
#include "refract/special.hpp"

namespace refract {

namespace {

// ---- polynomial helpers (ascending coefficients) ----

using Poly = std::vector<double>;

Poly poly_mul(const Poly& a, const Poly& b) {
    Poly r(a.size() + b.size() - 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

void poly_add(Poly& a, const Poly& b, double scale) {
    if (a.size() < b.size()) a.resize(b.size(), 0.0);
    for (size_t i = 0; i < b.size(); ++i) a[i] += scale * b[i];
}

long double poly_eval(const Poly& p, long double x) {
    long double v = 0.0;
    for (size_t i = p.size(); i-- > 0;) v = v * x + p[i];
    return v;
}

std::vector<double> companion_real_roots(const Poly& p) {
    int n = static_cast<int>(p.size()) - 1;
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) C(i, n - 1) = -p[i] / p[n];
    Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
    std::vector<double> roots;
    for (int i = 0; i < n; ++i) {
        auto ev = es.eigenvalues()(i);
        if (std::abs(ev.imag()) > 1e-7 * (1.0 + std::abs(ev.real())))
            throw RootSeparationFailure("complex root encountered in partial fractions");
        roots.push_back(ev.real());
    }
    return roots;
}

double newton_polish(const Poly& p, const Poly& dp, double x0) {
    long double x = x0;
    for (int it = 0; it < 60; ++it) {
        long double f = poly_eval(p, x);
        long double fp = poly_eval(dp, x);
        if (fp == 0.0L) break;
        long double xn = x - f / fp;
        if (std::abs(static_cast<double>(xn - x)) <=
            1e-16 * std::max(1.0, std::abs(static_cast<double>(xn)))) {
            x = xn;
            break;
        }
        x = xn;
    }
    return static_cast<double>(x);
}

// Characteristic polynomial of psi(theta) - delta theta - q = 0 after clearing the
// hyper-exponential denominators:
//   (s2 th^2 + cd th - (lambda+q)) prod_k (alpha_k + th)
//     + lambda sum_k A_k alpha_k prod_{j != k} (alpha_j + th).
Poly char_poly(const LevyModel& m, double delta, double q) {
    double s2 = 0.5 * m.sigma() * m.sigma();
    double cd = m.drift_c() - delta;
    const HyperExp* h = std::get_if<HyperExp>(&m.jumps());
    double lambda = h ? h->lambda : 0.0;

    Poly quad;
    if (s2 > 0.0)
        quad = {-(lambda + q), cd, s2};
    else
        quad = {-(lambda + q), cd};

    if (!h) return quad;

    Poly prod = {1.0};
    for (double a : h->rates) prod = poly_mul(prod, Poly{a, 1.0});
    Poly p = poly_mul(quad, prod);
    for (size_t k = 0; k < h->rates.size(); ++k) {
        Poly pk = {1.0};
        for (size_t j = 0; j < h->rates.size(); ++j)
            if (j != k) pk = poly_mul(pk, Poly{h->rates[j], 1.0});
        poly_add(p, pk, lambda * h->weights[k] * h->rates[k]);
    }
    return p;
}

// ---- fixed Talbot inversion, long double to tame the e^{rx} roundoff blowup ----

using CL = std::complex<long double>;

CL psi_delta_c(const LevyModel& m, double delta, CL th) {
    CL v = (static_cast<long double>(m.drift_c()) - static_cast<long double>(delta)) * th +
           0.5L * static_cast<long double>(m.sigma()) * m.sigma() * th * th;
    if (auto* h = std::get_if<HyperExp>(&m.jumps())) {
        CL s = 0.0L;
        for (size_t k = 0; k < h->rates.size(); ++k) {
            long double a = h->rates[k];
            s += static_cast<long double>(h->weights[k]) * a / (a + th);
        }
        v += static_cast<long double>(h->lambda) * (s - 1.0L);
    } else if (auto* st = std::get_if<StableTail>(&m.jumps())) {
        v += std::pow(th, CL(st->alpha));
    }
    return v;
}

template <typename F>
long double talbot(const F& transform, long double x, int nodes) {
    const long double pi = 3.141592653589793238462643383279503L;
    long double r = 2.0L * nodes / (5.0L * x);
    long double sum = 0.5L * std::exp(r * x) * transform(CL(r, 0.0L)).real();
    for (int k = 1; k < nodes; ++k) {
        long double th = k * pi / nodes;
        long double cot = std::cos(th) / std::sin(th);
        CL s(r * th * cot, r * th);
        long double sig = th + (th * cot - 1.0L) * cot;
        sum += (std::exp(x * s) * transform(s) * CL(1.0L, sig)).real();
    }
    return sum * r / nodes;
}

}  // namespace

RationalScale hyperexp_partial_fractions(const LevyModel& m, double delta, double q) {
    if (m.has_stable_jumps())
        throw NumericalError("partial fractions require a rational Laplace exponent");
    Poly p = char_poly(m, delta, q);

    std::vector<double> roots;
    if (q == 0.0) {
        // theta = 0 is an exact root of psi - delta theta when q = 0; deflate it.
        roots.push_back(0.0);
        Poly defl(p.begin() + 1, p.end());
        if (!defl.empty() && defl.size() > 1) {
            auto rs = companion_real_roots(defl);
            roots.insert(roots.end(), rs.begin(), rs.end());
        } else if (defl.size() == 1) {
            // degree-1 original polynomial: only the zero root
        }
    } else {
        roots = companion_real_roots(p);
    }

    Poly dp(p.size() - 1);
    for (size_t i = 1; i < p.size(); ++i) dp[i - 1] = i * p[i];
    for (double& r : roots)
        if (r != 0.0) r = newton_polish(p, dp, r);

    std::sort(roots.begin(), roots.end(), std::greater<>());
    for (size_t i = 1; i < roots.size(); ++i)
        if (roots[i - 1] - roots[i] < 1e-10 * std::max(1.0, std::abs(roots[i])))
            throw RootSeparationFailure("coincident roots in partial fractions");

    RationalScale rs;
    rs.roots = roots;
    for (double r : roots) {
        double d = psi_prime(m, r) - delta;
        if (d == 0.0)
            throw RootSeparationFailure("psi'(theta_i) = delta: degenerate root");
        rs.coeffs.push_back(1.0 / d);
    }
    return rs;
}

TabulatedScale invert_laplace_scale(const LevyModel& m, double delta, double q,
                                    const TabulationOptions& opts) {
    if (opts.mesh < 64) throw NumericalError("tabulation mesh must be >= 64");
    if (opts.x_max <= 0.0) throw NumericalError("tabulation needs x_max > 0");
    double phi = phi_inverse(m, delta, q);
    long double qq = q;
    auto transform = [&](CL beta) {
        return 1.0L / (psi_delta_c(m, delta, beta + CL(phi, 0.0L)) - qq);
    };

    TabulatedScale t;
    t.x_max = opts.x_max;
    int n = opts.mesh;
    t.h = opts.x_max / (n - 1);
    t.w.assign(n, 0.0);
    t.has_second = m.sigma() > 0.0;

    double cd = m.drift_c() - delta;
    t.w[0] = m.bounded_variation() ? 1.0 / cd : 0.0;

    std::vector<double> err(n, 0.0);
#pragma omp parallel for schedule(static) if (opts.parallel)
    for (int i = 1; i < n; ++i) {
        long double x = static_cast<long double>(i) * t.h;
        long double a = talbot(transform, x, 40);
        long double b = talbot(transform, x, 32);
        t.w[i] = static_cast<double>(std::exp(static_cast<long double>(phi) * x) * a);
        // Error relative to the function size: the exponential tilt amplifies the
        // absolute error by e^{phi x}, exactly as it amplifies w itself.
        err[i] = static_cast<double>(
            std::exp(static_cast<long double>(phi) * x) * std::abs(a - b)) /
                 std::max(1.0, std::abs(t.w[i]));
    }
    double emax = *std::max_element(err.begin(), err.end());
    t.inversion_error = emax;
    if (emax > opts.tol)
        throw InversionError("Laplace inversion self-check failed", emax);

    t.wp.assign(n, 0.0);
    for (int i = 1; i + 1 < n; ++i) t.wp[i] = (t.w[i + 1] - t.w[i - 1]) / (2.0 * t.h);
    t.wp[0] = (t.w[1] - t.w[0]) / t.h;
    t.wp[n - 1] = (t.w[n - 1] - t.w[n - 2]) / t.h;
    if (t.has_second) {
        t.wpp.assign(n, 0.0);
        for (int i = 1; i + 1 < n; ++i)
            t.wpp[i] = (t.w[i + 1] - 2.0 * t.w[i] + t.w[i - 1]) / (t.h * t.h);
        t.wpp[0] = t.wpp[1];
        t.wpp[n - 1] = t.wpp[n - 2];
    }
    t.zcum.assign(n, 0.0);
    for (int i = 1; i < n; ++i)
        t.zcum[i] = t.zcum[i - 1] + 0.5 * (t.w[i - 1] + t.w[i]) * t.h;
    return t;
}

ScaleFunction ScaleFunction::closed_form(const LevyModel& m, double delta, double q) {
    ScaleFunction s;
    s.model_ = &m;
    s.delta_ = delta;
    s.q_ = q;
    s.phi_ = phi_inverse(m, delta, q);
    s.rep_ = hyperexp_partial_fractions(m, delta, q);
    return s;
}

ScaleFunction ScaleFunction::stable_zero_q(const LevyModel& m, double delta) {
    if (!m.has_stable_jumps())
        throw NumericalError("stable_zero_q requires stable jumps");
    ScaleFunction s;
    s.model_ = &m;
    s.delta_ = delta;
    s.q_ = 0.0;
    s.phi_ = phi_inverse(m, delta, 0.0);
    double cd = m.drift_c() - delta;
    if (cd <= 0.0) throw NumericalError("stable scale needs positive drift c - delta");
    s.rep_ = MittagLefflerScale{std::get<StableTail>(m.jumps()).alpha, cd};
    return s;
}

ScaleFunction ScaleFunction::tabulated(const LevyModel& m, double delta, double q,
                                       const TabulationOptions& opts) {
    ScaleFunction s;
    s.model_ = &m;
    s.delta_ = delta;
    s.q_ = q;
    s.phi_ = phi_inverse(m, delta, q);
    s.rep_ = invert_laplace_scale(m, delta, q, opts);
    return s;
}

ScaleFunction ScaleFunction::make(const LevyModel& m, double delta, double q,
                                  const TabulationOptions& opts) {
    if (!m.has_stable_jumps()) {
        if (q == 0.0 && std::abs(mean(m) - delta) < 1e-12)
            throw NumericalError(
                "q = 0 with psi'(0+) = delta is degenerate; perturb q");
        return closed_form(m, delta, q);
    }
    if (q == 0.0) return stable_zero_q(m, delta);
    return tabulated(m, delta, q, opts);
}

namespace {

double interp(const std::vector<double>& v, double h, double x_max, double x) {
    if (x > x_max + 1e-12) throw NumericalError("evaluation beyond tabulated range");
    double u = std::min(x, x_max) / h;
    size_t i = std::min(static_cast<size_t>(u), v.size() - 2);
    double f = u - i;
    return (1.0 - f) * v[i] + f * v[i + 1];
}

}  // namespace

double ScaleFunction::w(double x) const {
    if (x < 0.0) return 0.0;
    if (auto* r = std::get_if<RationalScale>(&rep_)) {
        double s = 0.0;
        for (size_t i = 0; i < r->roots.size(); ++i)
            s += r->coeffs[i] * std::exp(r->roots[i] * x);
        return s;
    }
    if (auto* ml = std::get_if<MittagLefflerScale>(&rep_)) {
        if (x == 0.0) return 0.0;
        double e = mittag_leffler(ml->alpha - 1.0, -ml->cd * std::pow(x, ml->alpha - 1.0));
        return (1.0 - e) / ml->cd;
    }
    const auto& t = std::get<TabulatedScale>(rep_);
    return interp(t.w, t.h, t.x_max, x);
}

double ScaleFunction::w_prime(double x) const {
    if (x < 0.0) return 0.0;
    if (auto* r = std::get_if<RationalScale>(&rep_)) {
        double s = 0.0;
        for (size_t i = 0; i < r->roots.size(); ++i)
            s += r->coeffs[i] * r->roots[i] * std::exp(r->roots[i] * x);
        return s;
    }
    if (auto* ml = std::get_if<MittagLefflerScale>(&rep_)) {
        double b = ml->alpha - 1.0;
        if (x == 0.0) throw NumericalError("stable W' diverges at 0");
        return b * std::pow(x, b - 1.0) *
               mittag_leffler_deriv(b, -ml->cd * std::pow(x, b));
    }
    const auto& t = std::get<TabulatedScale>(rep_);
    return interp(t.wp, t.h, t.x_max, x);
}

double ScaleFunction::w_second(double x) const {
    if (x < 0.0) return 0.0;
    if (auto* r = std::get_if<RationalScale>(&rep_)) {
        double s = 0.0;
        for (size_t i = 0; i < r->roots.size(); ++i)
            s += r->coeffs[i] * r->roots[i] * r->roots[i] * std::exp(r->roots[i] * x);
        return s;
    }
    if (auto* t = std::get_if<TabulatedScale>(&rep_)) {
        if (t->has_second) return interp(t->wpp, t->h, t->x_max, x);
    }
    throw SecondDerivativeUnavailable(
        "second derivative requires a Gaussian component or a closed form");
}

double ScaleFunction::z(double x) const {
    if (x <= 0.0 || q_ == 0.0) return 1.0;
    if (auto* r = std::get_if<RationalScale>(&rep_)) {
        double s = 0.0;
        for (size_t i = 0; i < r->roots.size(); ++i) {
            double th = r->roots[i];
            s += r->coeffs[i] * (std::exp(th * x) - 1.0) / th;
        }
        return 1.0 + q_ * s;
    }
    const auto& t = std::get<TabulatedScale>(rep_);
    return 1.0 + q_ * interp(t.zcum, t.h, t.x_max, x);
}

double ScaleFunction::tail_transform(double rate, double b, int deriv) const {
    if (auto* r = std::get_if<RationalScale>(&rep_)) {
        if (rate <= r->roots[0])
            throw NumericalError("tail_transform: tilt rate must exceed the top root");
        double s = 0.0;
        for (size_t i = 0; i < r->roots.size(); ++i) {
            double th = r->roots[i];
            s += r->coeffs[i] * std::pow(th, deriv) * std::exp(-(rate - th) * b) /
                 (rate - th);
        }
        return s;
    }
    // Generic route: reduce derivatives by parts, then tilted truncation. The top
    // root of any representation here is phi_ of this function's own exponent.
    if (rate <= phi_)
        throw NumericalError("tail_transform: tilt rate must exceed the top root");
    if (deriv == 1) return -std::exp(-rate * b) * w(b) + rate * tail_transform(rate, b, 0);
    if (deriv == 2)
        return -std::exp(-rate * b) * w_prime(b) + rate * tail_transform(rate, b, 1);
    double bound = w(b) * std::exp(-phi_ * b) + 1.0;
    auto f = [&](double y) { return std::exp(-rate * y) * w(y); };
    return integrate_decaying(f, b, rate - phi_, bound).value;
}

double scale_w(const LevyModel& m, double q, double x) {
    return ScaleFunction::make(m, 0.0, q).w(x);
}

double scale_z(const LevyModel& m, double q, double x) {
    return ScaleFunction::make(m, 0.0, q).z(x);
}

double scale_w_deriv(const LevyModel& m, double q, double x, int order) {
    auto s = ScaleFunction::make(m, 0.0, q);
    return order == 1 ? s.w_prime(x) : s.w_second(x);
}

double refracted_scale(const LevyModel& m, const RefractionConfig& r, double q, double x) {
    validate_refraction(m, r);
    return ScaleFunction::make(m, r.delta, q).w(x);
}

}  // namespace refract
