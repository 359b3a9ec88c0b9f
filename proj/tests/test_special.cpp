#include <cmath>
#include <initializer_list>

#include "doctest.h"
#include "refract/special.hpp"

using namespace refract;

namespace {

// erfcx(x) = e^{x^2} erfc(x) without overflow; asymptotic series for large x.
double erfcx(double x) {
    if (x < 12.0) return std::exp(x * x) * std::erfc(x);
    double inv2 = 1.0 / (2.0 * x * x), s = 1.0, t = 1.0;
    for (int n = 1; n < 12; ++n) {
        t *= -(2.0 * n - 1.0) * inv2;
        s += t;
    }
    return s / (x * std::sqrt(M_PI));
}

}  // namespace

TEST_CASE("mittag-leffler basics") {
    CHECK(mittag_leffler(0.5, 0.0) == 1.0);
    CHECK(mittag_leffler(0.3, 0.0) == 1.0);
    CHECK(mittag_leffler(0.5, -1.0) == doctest::Approx(std::exp(1.0) * std::erfc(1.0)).epsilon(1e-10));
}

TEST_CASE("mittag-leffler beta=1/2 erfc identity across the switch radius") {
    // E_{1/2}(-x) = erfcx(x) for x >= 0
    for (double x : {0.1, 0.5, 1.0, 3.0, 4.9, 5.1, 8.0, 20.0, 100.0, 1000.0}) {
        double e = mittag_leffler(0.5, -x);
        CHECK(e == doctest::Approx(erfcx(x)).epsilon(1e-9));
        CHECK(std::abs(e - erfcx(x)) < 1e-10);
    }
}

TEST_CASE("mittag-leffler monotone and decaying for z<=0") {
    for (double beta : {0.3, 0.5, 0.7, 0.9}) {
        double prev = 1.0;
        for (double x = 0.25; x < 60.0; x *= 1.7) {
            double v = mittag_leffler(beta, -x);
            CHECK(v > 0.0);
            CHECK(v < prev);
            prev = v;
        }
        // asymptotic tail ~ 1/(x Gamma(1-beta))
        double x = 1e4;
        CHECK(mittag_leffler(beta, -x) ==
              doctest::Approx(1.0 / (x * std::tgamma(1.0 - beta))).epsilon(0.05));
    }
}

TEST_CASE("mittag-leffler derivative vs finite differences") {
    for (double beta : {0.4, 0.5, 0.8}) {
        for (double z : {-0.5, -3.0, -7.0, -30.0}) {
            double h = 1e-5 * std::max(1.0, -z);
            double fd = (mittag_leffler(beta, z + h) - mittag_leffler(beta, z - h)) / (2 * h);
            CHECK(mittag_leffler_deriv(beta, z) == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}
