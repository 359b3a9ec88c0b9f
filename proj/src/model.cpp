#include "refract/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace refract {

namespace {

// int_{(0,1)} x Pi(dx) for the hyper-exponential measure
// Pi(dx) = lambda sum A_k alpha_k e^{-alpha_k x} dx.
double small_jump_mean(const HyperExp& j) {
    double s = 0.0;
    for (size_t k = 0; k < j.rates.size(); ++k) {
        double a = j.rates[k];
        s += j.weights[k] * ((1.0 - std::exp(-a)) / a - std::exp(-a));
    }
    return j.lambda * s;
}

void check_hyperexp(const HyperExp& j) {
    if (j.lambda <= 0.0) throw ModelError("hyperexp: lambda must be positive");
    if (j.weights.size() != j.rates.size() || j.weights.empty())
        throw ModelError("hyperexp: weights and rates must be non-empty and of equal length");
    double sum = 0.0;
    for (double w : j.weights) {
        if (w <= 0.0) throw ModelError("hyperexp: weights must be positive");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ModelError("hyperexp: weights must sum to 1");
    for (double a : j.rates)
        if (a <= 0.0) throw ModelError("hyperexp: rates must be positive");
    auto sorted = j.rates;
    std::sort(sorted.begin(), sorted.end());
    for (size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i] - sorted[i - 1] < 1e-12 * sorted[i])
            throw ModelError("hyperexp: rates must be distinct");
}

}  // namespace

LevyModel LevyModel::compound_poisson(double c, HyperExp jumps, double sigma) {
    check_hyperexp(jumps);
    LevyModel m;
    m.sigma_ = sigma;
    m.c_ = c;
    m.gamma_ = c - small_jump_mean(jumps);
    m.jumps_ = std::move(jumps);
    m.validate();
    return m;
}

LevyModel LevyModel::brownian(double gamma, double sigma) {
    LevyModel m;
    m.gamma_ = gamma;
    m.sigma_ = sigma;
    m.c_ = gamma;
    m.jumps_ = NoJumps{};
    m.validate();
    return m;
}

LevyModel LevyModel::stable_with_drift(double c, double alpha) {
    if (!(alpha > 1.0 && alpha < 2.0))
        throw ModelError("stable index alpha must lie strictly in (1,2)");
    LevyModel m;
    m.gamma_ = c;
    m.c_ = c;
    m.jumps_ = StableTail{alpha};
    m.validate();
    return m;
}

LevyModel LevyModel::from_triplet(double gamma, double sigma, JumpSpec jumps) {
    if (auto* h = std::get_if<HyperExp>(&jumps)) {
        check_hyperexp(*h);
        return compound_poisson(gamma + small_jump_mean(*h), *h, sigma);
    }
    if (auto* s = std::get_if<StableTail>(&jumps)) {
        (void)s;
        return stable_with_drift(gamma, std::get<StableTail>(jumps).alpha);
    }
    return brownian(gamma, sigma);
}

bool LevyModel::bounded_variation() const {
    if (sigma_ != 0.0) return false;
    return !has_stable_jumps();
}

double LevyModel::jump_rate() const {
    if (auto* h = std::get_if<HyperExp>(&jumps_)) return h->lambda;
    return 0.0;
}

void LevyModel::validate() const {
    if (sigma_ < 0.0) throw ModelError("sigma must be nonnegative");
    if (bounded_variation() && c_ <= 0.0)
        throw ModelError("bounded-variation model must have positive natural drift c");
    if (has_stable_jumps()) {
        double a = std::get<StableTail>(jumps_).alpha;
        if (!(a > 1.0 && a < 2.0)) throw ModelError("stable index alpha must lie in (1,2)");
    }
}

double laplace_exponent(const LevyModel& m, double theta) {
    double v = m.drift_c() * theta + 0.5 * m.sigma() * m.sigma() * theta * theta;
    if (auto* h = std::get_if<HyperExp>(&m.jumps())) {
        double s = 0.0;
        for (size_t k = 0; k < h->rates.size(); ++k) {
            double a = h->rates[k];
            if (std::abs(a + theta) < 1e-300)
                throw ModelError("laplace_exponent evaluated at a pole -alpha_k");
            s += h->weights[k] * a / (a + theta);
        }
        v += h->lambda * (s - 1.0);
    } else if (auto* st = std::get_if<StableTail>(&m.jumps())) {
        v += std::pow(theta, st->alpha);
    }
    return v;
}

std::complex<double> laplace_exponent(const LevyModel& m, std::complex<double> theta) {
    std::complex<double> v = m.drift_c() * theta + 0.5 * m.sigma() * m.sigma() * theta * theta;
    if (auto* h = std::get_if<HyperExp>(&m.jumps())) {
        std::complex<double> s = 0.0;
        for (size_t k = 0; k < h->rates.size(); ++k) {
            double a = h->rates[k];
            s += h->weights[k] * a / (a + theta);
        }
        v += h->lambda * (s - 1.0);
    } else if (auto* st = std::get_if<StableTail>(&m.jumps())) {
        v += std::pow(theta, std::complex<double>(st->alpha));
    }
    return v;
}

double psi_prime(const LevyModel& m, double theta) {
    double v = m.drift_c() + m.sigma() * m.sigma() * theta;
    if (auto* h = std::get_if<HyperExp>(&m.jumps())) {
        double s = 0.0;
        for (size_t k = 0; k < h->rates.size(); ++k) {
            double a = h->rates[k];
            s += h->weights[k] * a / ((a + theta) * (a + theta));
        }
        v -= h->lambda * s;
    } else if (auto* st = std::get_if<StableTail>(&m.jumps())) {
        v += st->alpha * std::pow(theta, st->alpha - 1.0);
    }
    return v;
}

double psi_second(const LevyModel& m, double theta) {
    double v = m.sigma() * m.sigma();
    if (auto* h = std::get_if<HyperExp>(&m.jumps())) {
        double s = 0.0;
        for (size_t k = 0; k < h->rates.size(); ++k) {
            double a = h->rates[k];
            s += h->weights[k] * a / std::pow(a + theta, 3);
        }
        v += 2.0 * h->lambda * s;
    } else if (auto* st = std::get_if<StableTail>(&m.jumps())) {
        v += st->alpha * (st->alpha - 1.0) * std::pow(theta, st->alpha - 2.0);
    }
    return v;
}

double mean(const LevyModel& m) {
    if (auto* h = std::get_if<HyperExp>(&m.jumps())) {
        double s = 0.0;
        for (size_t k = 0; k < h->rates.size(); ++k)
            s += h->weights[k] / h->rates[k];
        return m.drift_c() - h->lambda * s;
    }
    return m.drift_c();  // stable (alpha > 1 term has zero slope at 0) and Gaussian
}

double phi_inverse(const LevyModel& m, double delta, double q) {
    if (q < 0.0) throw ModelError("phi_inverse needs q >= 0");
    if (delta < 0.0) throw ModelError("phi_inverse needs delta >= 0");
    auto f = [&](double t) { return laplace_exponent(m, t) - delta * t - q; };
    auto fp = [&](double t) { return psi_prime(m, t) - delta; };

    if (q == 0.0 && fp(0.0) >= 0.0) return 0.0;

    // psi - delta theta is convex and -> infinity; bracket the largest root.
    double hi = 1.0;
    while (f(hi) <= 0.0) {
        hi *= 2.0;
        if (hi > 1e30) throw NumericalError("phi_inverse: failed to bracket root");
    }
    double lo = 0.0;
    // Safeguarded Newton from the upper end; convexity keeps iterates above the root.
    double x = hi;
    for (int it = 0; it < 200; ++it) {
        double fx = f(x);
        if (fx > 0.0) hi = x; else lo = x;
        double step = fx / fp(x);
        double xn = x - step;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) <= 1e-14 * std::max(1.0, std::abs(xn))) {
            x = xn;
            break;
        }
        x = xn;
    }
    return x;
}

void validate_refraction(const LevyModel& m, const RefractionConfig& r) {
    if (r.delta <= 0.0) throw NonPositiveDelta(r.delta);
    if (r.b < 0.0) throw ModelError("refraction level b must be nonnegative");
    if (m.bounded_variation() && r.delta >= m.drift_c())
        throw HypothesisHViolation(m.drift_c(), r.delta);
}

}  // namespace refract
