#include <cmath>
#include <limits>

#include "doctest.h"
#include "refract/applications.hpp"
#include "refract/identities.hpp"
#include "refract/model.hpp"
#include "refract/scale.hpp"
#include "refract/special.hpp"

using namespace refract;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LevyModel m1() { return LevyModel::compound_poisson(2.0, {1.0, {1.0}, {1.0}}); }
LevyModel m1b() {
    return LevyModel::compound_poisson(2.5, {1.5, {0.6, 0.4}, {1.0, 3.0}});
}
LevyModel m2() { return LevyModel::compound_poisson(2.0, {1.0, {1.0}, {1.0}}, 1.0); }
RefractionConfig r1() { return {0.5, 1.0}; }

}  // namespace

TEST_CASE("partial-fraction dividend value matches the quadrature route") {
    for (const auto& m : {m1(), m1b()}) {
        DividendQuery q{0.0, 0.5, r1()};
        for (int i = 0; i <= 100; ++i) {
            q.x = 10.0 * i / 100.0;
            double a = dividend_value(m, q).value;
            double b = dividend_value_hyperexp(m, q).value;
            CHECK(a == doctest::Approx(b).epsilon(1e-8));
        }
    }
}

TEST_CASE("the coefficient of the growing exponential cancels") {
    // V(x) stays bounded above the threshold only because the term attached to
    // the positive root of psi(theta) - delta theta = q drops out identically.
    for (const auto& m : {m1(), m1b()}) {
        double delta = 0.5, b = 1.0, q = 0.5;
        auto wx = hyperexp_partial_fractions(m, 0.0, q);
        auto wy = hyperexp_partial_fractions(m, delta, q);
        double den = 0.0, cross = 0.0;
        for (size_t i = 0; i < wx.roots.size(); ++i) {
            double base = wx.coeffs[i] * wx.roots[i] * std::exp(wx.roots[i] * b);
            den += wy.roots[0] * base / (wy.roots[0] - wx.roots[i]);
            cross += wy.coeffs[0] * base / (wy.roots[0] - wx.roots[i]);
        }
        double bracket = cross / den - wy.coeffs[0] / wy.roots[0];
        CHECK(std::abs(bracket) < 1e-10);
    }
}

TEST_CASE("dividend value is continuous at the threshold") {
    for (const auto& m : {m1(), m1b()}) {
        double below = dividend_value_hyperexp(m, {1.0 - 1e-12, 0.5, r1()}).value;
        double above = dividend_value_hyperexp(m, {1.0 + 1e-12, 0.5, r1()}).value;
        CHECK(std::abs(above - below) < 1e-9);
    }
}

TEST_CASE("dividend value saturates at delta / q far above the threshold") {
    DividendQuery q{51.0, 0.5, r1()};
    CHECK(dividend_value_hyperexp(m1(), q).value ==
          doctest::Approx(0.5 / 0.5).epsilon(1e-6));
    CHECK(dividend_value(m2(), q).value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("dividend value is nonnegative, bounded, and increasing in x") {
    double cap = 0.5 / 0.5;
    double prev = -1.0;
    for (int i = 0; i <= 60; ++i) {
        double v = dividend_value_hyperexp(m1(), {6.0 * i / 60.0, 0.5, r1()}).value;
        CHECK(v >= prev - 1e-12);
        CHECK(v >= 0.0);
        CHECK(v <= cap + 1e-9);
        prev = v;
    }
}

TEST_CASE("dividend value rejects bad inputs") {
    CHECK_THROWS_AS(dividend_value(m1(), {1.0, 0.0, r1()}), ModelError);
    CHECK_THROWS_AS(dividend_value_hyperexp(m2(), {1.0, 0.5, r1()}), ModelError);
}

TEST_CASE("overshoot/undershoot law integrates to the ruin probability") {
    // no Gaussian part and bounded variation, so ruin can only happen by a jump
    for (double x : {0.5, 2.0}) {
        double total = overshoot_undershoot(m1(), x, r1(), -kInf, 0.0, 0.0, kInf);
        double ruin = ruin_probability(m1(), x, r1()).value;
        CHECK(total == doctest::Approx(ruin).epsilon(1e-6));
    }
}

TEST_CASE("overshoot/undershoot law is additive over disjoint windows") {
    double x = 1.5;
    double total = overshoot_undershoot(m1(), x, r1(), -kInf, 0.0, 0.0, kInf);
    double a1 = overshoot_undershoot(m1(), x, r1(), -1.0, 0.0, 0.0, kInf);
    double a2 = overshoot_undershoot(m1(), x, r1(), -kInf, -1.0, 0.0, kInf);
    CHECK(a1 + a2 == doctest::Approx(total).epsilon(1e-8));
    double b1 = overshoot_undershoot(m1(), x, r1(), -kInf, 0.0, 0.0, 1.0);
    double b2 = overshoot_undershoot(m1(), x, r1(), -kInf, 0.0, 1.0, kInf);
    CHECK(b1 + b2 == doctest::Approx(total).epsilon(1e-8));
    double rect = overshoot_undershoot(m1(), x, r1(), -1.0, 0.0, 0.0, 1.0);
    CHECK(rect > 0.0);
    CHECK(rect < total);
}

TEST_CASE("overshoot/undershoot law rejects a non-dominating drift") {
    CHECK_THROWS_AS(overshoot_undershoot(m1(), 1.0, {1.5, 1.0}, -kInf, 0.0, 0.0, kInf),
                    DriftNotDominating);
}

TEST_CASE("smooth pasting holds automatically with a Gaussian part") {
    for (double b : {0.5, 1.0, 2.0}) {
        auto rep = smooth_pasting_gap(m2(), {0.5, b}, 0.1);
        CHECK(std::abs(rep.gap) < 1e-12);
        CHECK(rep.right_deriv == doctest::Approx(rep.left_deriv));
    }
}

TEST_CASE("smooth pasting fails generically in bounded variation, holds at the root") {
    double q = 0.1, delta = 0.5;
    auto resid = [&](double b) {
        return smooth_pasting_gap(m1(), {delta, b}, q).condition_residual;
    };
    // generic thresholds: derivative jump present
    CHECK(std::abs(smooth_pasting_gap(m1(), {delta, 0.2}, q).gap) > 1e-4);
    CHECK(std::abs(smooth_pasting_gap(m1(), {delta, 3.0}, q).gap) > 1e-4);
    // bracket a sign change of the pasting condition and bisect to the root
    double lo = 0.05, hi = 0.05;
    bool found = false;
    for (double b = 0.1; b <= 8.0; b += 0.1) {
        if (resid(b) * resid(lo) < 0.0) {
            hi = b;
            found = true;
            break;
        }
        lo = b;
    }
    REQUIRE(found);
    for (int i = 0; i < 80; ++i) {
        double mid = 0.5 * (lo + hi);
        (resid(mid) * resid(lo) < 0.0 ? hi : lo) = mid;
    }
    auto rep = smooth_pasting_gap(m1(), {delta, 0.5 * (lo + hi)}, q);
    CHECK(std::abs(rep.gap) < 1e-6);
    CHECK(rep.condition_holds);
}

TEST_CASE("stable refracted ruin probability") {
    double c = 1.0, delta = 0.3, alpha = 1.5, b = 1.0;
    double beta = alpha - 1.0;
    CHECK(ruin_probability_stable(0.0, b, c, delta, alpha) == 1.0);
    // below the threshold only the prefactor differs from the classical law
    double pref = (c - delta) /
                  (c - delta + delta * mittag_leffler(beta, -c * std::pow(b, beta)));
    for (double x : {0.2, 0.7}) {
        double expect = 1.0 - pref * (1.0 - mittag_leffler(beta, -c * std::pow(x, beta)));
        CHECK(ruin_probability_stable(x, b, c, delta, alpha) ==
              doctest::Approx(expect).epsilon(1e-12));
    }
    // vanishing refraction rate recovers 1 - psi'(0+) W(x)
    for (double x : {0.5, 2.0}) {
        double classical = mittag_leffler(beta, -c * std::pow(x, beta));
        CHECK(ruin_probability_stable(x, b, c, 1e-10, alpha) ==
              doctest::Approx(classical).epsilon(1e-7));
    }
    // continuity at the threshold and monotone decay in x
    double jb = ruin_probability_stable(b - 1e-9, b, c, delta, alpha) -
                ruin_probability_stable(b + 1e-9, b, c, delta, alpha);
    CHECK(std::abs(jb) < 1e-7);
    double prev = 2.0;
    for (double x : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0}) {
        double p = ruin_probability_stable(x, b, c, delta, alpha);
        CHECK(p <= prev + 1e-12);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        prev = p;
    }
    CHECK_THROWS_AS(ruin_probability_stable(1.0, 1.0, 1.0, 1.5, 1.5), ModelError);
}
