#include <cmath>
#include <random>

#include "doctest.h"
#include "refract/model.hpp"

using namespace refract;

namespace {

LevyModel m1() {
    return LevyModel::compound_poisson(2.0, HyperExp{1.0, {1.0}, {1.0}});
}

}  // namespace

TEST_CASE("laplace exponent closed forms") {
    auto gauss = LevyModel::brownian(0.0, std::sqrt(2.0));
    CHECK(laplace_exponent(gauss, 0.0) == doctest::Approx(0.0));
    CHECK(laplace_exponent(gauss, 3.0) == doctest::Approx(9.0));

    auto m = m1();
    CHECK(laplace_exponent(m, 0.0) == doctest::Approx(0.0));
    // c th - lambda + lambda a/(a+th) = 2 - 1 + 0.5
    CHECK(laplace_exponent(m, 1.0) == doctest::Approx(1.5));

    auto st = LevyModel::stable_with_drift(1.0, 1.5);
    CHECK(laplace_exponent(st, 2.0) == doctest::Approx(2.0 + std::pow(2.0, 1.5)));
}

TEST_CASE("mean") {
    CHECK(mean(LevyModel::brownian(0.7, 1.0)) == doctest::Approx(0.7));
    CHECK(mean(m1()) == doctest::Approx(1.0));  // c - lambda/alpha
    auto st = LevyModel::stable_with_drift(1.3, 1.5);
    CHECK(mean(st) == doctest::Approx(1.3));
    // finite differences of psi at 0; Richardson works for smooth exponents
    double h = 1e-6;
    {
        auto m = m1();
        double fd2 = (2 * laplace_exponent(m, h) - 0.5 * laplace_exponent(m, 2 * h)) / h;
        CHECK(mean(m) == doctest::Approx(fd2).epsilon(1e-5));
    }
    // stable: psi'' blows up at 0, so use a one-sided quotient at tiny h where the
    // theta^alpha term contributes only h^{alpha-1} ~ 1e-6
    {
        double hs = 1e-12;
        double fd = laplace_exponent(st, hs) / hs;
        CHECK(mean(st) == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("phi_inverse") {
    auto gauss = LevyModel::brownian(0.0, std::sqrt(2.0));
    CHECK(phi_inverse(gauss, 0.0, 4.0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(phi_inverse(m1(), 0.3, 0.0) == 0.0);  // psi'(0+) = 1 > delta

    // bisection oracle for the hyper-exponential case
    auto m = m1();
    double q = 0.5;
    double lo = 0.0, hi = 2.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (laplace_exponent(m, mid) - q > 0 ? hi : lo) = mid;
    }
    CHECK(phi_inverse(m, 0.0, q) == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-10));
}

TEST_CASE("psi(Phi(q)) = q and convexity, sampled") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, 10.0);
    auto models = {m1(), LevyModel::compound_poisson(2.0, HyperExp{2.0, {0.4, 0.6}, {1.0, 3.0}}, 1.0),
                   LevyModel::stable_with_drift(1.0, 1.5)};
    for (const auto& m : models) {
        for (int i = 0; i < 50; ++i) {
            double q = U(rng);
            double p = phi_inverse(m, 0.0, q);
            CHECK(laplace_exponent(m, p) == doctest::Approx(q).epsilon(1e-9));
            double t1 = U(rng), t2 = U(rng);
            if (t1 > t2) std::swap(t1, t2);
            double mid = laplace_exponent(m, 0.5 * (t1 + t2));
            CHECK(mid <= 0.5 * (laplace_exponent(m, t1) + laplace_exponent(m, t2)) + 1e-10);
            double d = U(rng) / 10.0;
            CHECK(phi_inverse(m, d, q) >= phi_inverse(m, 0.0, q) - 1e-12);
        }
    }
}

TEST_CASE("hypothesis (H) validation") {
    CHECK_NOTHROW(validate_refraction(m1(), {1.0, 1.0}));
    CHECK_THROWS_AS(validate_refraction(m1(), {2.5, 1.0}), HypothesisHViolation);
    CHECK_THROWS_AS(validate_refraction(m1(), {-0.1, 1.0}), NonPositiveDelta);
    // (H) does not constrain unbounded-variation paths
    CHECK_NOTHROW(validate_refraction(LevyModel::stable_with_drift(1.0, 1.5), {10.0, 1.0}));
}

TEST_CASE("model invariants") {
    CHECK(m1().bounded_variation());
    CHECK(!LevyModel::stable_with_drift(1.0, 1.5).bounded_variation());
    CHECK(!LevyModel::compound_poisson(2.0, HyperExp{1.0, {1.0}, {1.0}}, 1.0).bounded_variation());
    CHECK_THROWS_AS(LevyModel::stable_with_drift(1.0, 2.3), ModelError);
    CHECK_THROWS_AS(LevyModel::compound_poisson(2.0, HyperExp{1.0, {0.5}, {1.0}}), ModelError);
    // triplet round trip: gamma chosen so that c = 2
    auto m = m1();
    auto m2 = LevyModel::from_triplet(m.gamma(), 0.0, m.jumps());
    CHECK(m2.drift_c() == doctest::Approx(2.0).epsilon(1e-14));
}
