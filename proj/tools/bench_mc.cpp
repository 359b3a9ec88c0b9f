// Compares the serial and OpenMP block schedules of the Monte Carlo engine on a
// fixed workload and verifies that they produce bit-identical estimates.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <omp.h>

#include "refract/identities.hpp"
#include "refract/model.hpp"
#include "refract/simulator.hpp"

using namespace refract;

namespace {

double now() {
    using clk = std::chrono::steady_clock;
    return std::chrono::duration<double>(clk::now().time_since_epoch()).count();
}

}  // namespace

int main(int argc, char** argv) {
    long n_paths = argc > 1 ? std::atol(argv[1]) : 200000;
    auto m = LevyModel::compound_poisson(2.0, {1.0, {1.0}, {1.0}});
    RefractionConfig r{0.5, 1.0};
    FunctionalParams fp;
    fp.x = 1.5;
    fp.a = 3.0;
    fp.q = 0.1;

    SimConfig sim;
    sim.n_paths = n_paths;
    sim.seed = 2024;

    sim.parallel = false;
    double t0 = now();
    McEstimate serial = estimate_functional(m, r, Functional::TwoSidedUp, fp, sim);
    double t_serial = now() - t0;

    sim.parallel = true;
    t0 = now();
    McEstimate parallel = estimate_functional(m, r, Functional::TwoSidedUp, fp, sim);
    double t_parallel = now() - t0;

    double analytic = two_sided_up(m, {fp.x, fp.a, fp.q, r}).value;
    std::printf("paths            : %ld\n", n_paths);
    std::printf("threads          : %d\n", omp_get_max_threads());
    std::printf("serial           : %.3f s  (%.0f paths/s)\n", t_serial,
                n_paths / t_serial);
    std::printf("parallel         : %.3f s  (%.0f paths/s)\n", t_parallel,
                n_paths / t_parallel);
    std::printf("speedup          : %.2fx\n", t_serial / t_parallel);
    std::printf("estimate         : %.17g +- %.3g\n", parallel.mean, parallel.stderr_);
    std::printf("analytic         : %.17g\n", analytic);
    std::printf("bit-identical    : %s\n",
                serial.mean == parallel.mean && serial.stderr_ == parallel.stderr_
                    ? "yes"
                    : "NO");
    return serial.mean == parallel.mean ? 0 : 1;
}
