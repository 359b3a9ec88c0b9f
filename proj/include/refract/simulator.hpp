#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "refract/model.hpp"

namespace refract {

enum class Scheme { ExactBV, StrongApprox };

enum class Functional {
    TwoSidedUp,     // E_x[e^{-q kappa_a^+}; up before down]
    TwoSidedDown,   // E_x[e^{-q kappa_0^-}; down before up]
    OneSidedUp,     // E_x[e^{-q kappa_a^+}]
    OneSidedDown,   // E_x[e^{-q kappa_0^-}]
    Ruin,           // P_x(kappa_0^- < infinity), q = 0
    Creep,          // E_x[e^{-q kappa_0^-}; overshoot in (-eps_mc, 0]]
    ResolventMass,  // int_0^{kappa_0^-} e^{-qt} 1{U_t in [b_lo, b_hi]} dt
    Dividends,      // delta int_0^{kappa_0^-} e^{-qt} 1{U_t > b} dt
    OvershootRect,  // P_x(overshoot in [a_lo, a_hi], undershoot in [b_lo, b_hi]), q = 0
};

struct SimConfig {
    Scheme scheme = Scheme::ExactBV;
    long n_paths = 100000;
    std::uint64_t seed = 1;
    double horizon = 0.0;  // 0 = choose from the discount / kill-level bias budget
    double eps = 1e-3;     // StrongApprox: jump-size truncation
    double step = 1e-3;    // StrongApprox: Euler step
    bool gaussian_small_jumps = true;
    bool parallel = true;  // OpenMP over path blocks; serial path is bit-identical
    int block_size = 256;
};

struct FunctionalParams {
    double x = 0.0;      // start level
    double a = 0.0;      // upper level (two-sided / one-sided up)
    double q = 0.0;      // discount
    double b_lo = 0.0;   // resolvent band or undershoot interval
    double b_hi = 0.0;
    double a_lo = 0.0;   // overshoot interval, in (-inf, 0)
    double a_hi = 0.0;
    double eps_mc = 0.01;      // creeping window
    double kill_level = 0.0;   // q=0 upper kill; 0 = choose automatically
    double continuation = 0.0; // value credited to q=0 paths that reach kill_level
};

struct McEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    long n = 0;
};

// Event-time skeleton of one path of the refracted process. Between consecutive
// entries the path is linear (exact for bounded variation; Euler grid otherwise).
struct PathSample {
    std::vector<double> times;
    std::vector<double> values;
    double horizon = 0.0;
    double running_sup = 0.0;
    double running_inf = 0.0;
    double occupation_above = 0.0;  // int_0^end 1{U_s > b} ds
    double ruin_time = std::numeric_limits<double>::infinity();
    double overshoot = 0.0;   // U at the first passage below 0
    double undershoot = 0.0;  // U just before it
    bool hit_upper = false;   // reached the upper kill level
    double upper_time = std::numeric_limits<double>::infinity();
};

// One exact path of a bounded-variation driver: jump epochs and threshold
// crossings in closed form, ruin only at jumps.
PathSample simulate_exact_bv(const LevyModel& m, const RefractionConfig& r, double x0,
                             double T, std::uint64_t seed);

// Euler path with jumps >= eps exact, small jumps dropped with drift compensation
// or replaced by a matching Brownian term.
PathSample simulate_strong_approx(const LevyModel& m, const RefractionConfig& r,
                                  double x0, double T, std::uint64_t seed, double eps,
                                  double h, bool gaussian_small_jumps = true);

// Block-parallel Monte Carlo estimate of one functional. Deterministic for a
// given (seed, n_paths, block_size) regardless of thread count.
McEstimate estimate_functional(const LevyModel& m, const RefractionConfig& r,
                               Functional functional, const FunctionalParams& params,
                               const SimConfig& sim);

}  // namespace refract
