// Timing comparison of the serial reference kernels against the OpenMP
// ones, on the default model. Run by hand; not part of the test suite.

#include <chrono>
#include <cmath>
#include <cstdio>

#include "seqgrid/config.hpp"
#include "seqgrid/sweep.hpp"
#include "seqgrid/wcsim.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace seqgrid;

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

double max_gap(const sweep::GridEval& a, const sweep::GridEval& b) {
  double g = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a.ok[i] || !b.ok[i]) {
      if (a.ok[i] != b.ok[i]) return HUGE_VAL;
      continue;
    }
    g = std::max(g, std::abs(a.value[i] - b.value[i]));
  }
  return g;
}

}  // namespace

int main() {
  const config::Config cfg = config::defaults();
  const wcsim::OperatingSolve os =
      wcsim::fault_operating_point(cfg.sys, cfg.fault);
  const wcsim::CompositeModel m =
      wcsim::build_composite(cfg.sys, os.op, cfg.fault);
  const tfcore::FreqExpr z = wcsim::zgpe(m);

#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (built without OpenMP)\n");
#endif
  std::printf("%-18s %10s %12s %12s %8s %10s\n", "kernel", "points",
              "serial_ms", "parallel_ms", "speedup", "max_gap");

  {
    const std::size_t n = 200000;
    const tfcore::FrequencyGrid grid =
        tfcore::FrequencyGrid::log_spaced(0.1, 1e6, n);
    const std::vector<Complex> s = sweep::jomega(grid.omegas());

    auto t0 = std::chrono::steady_clock::now();
    const sweep::GridEval a = sweep::eval_serial(z, s);
    const double ts = ms_since(t0);
    t0 = std::chrono::steady_clock::now();
    const sweep::GridEval b = sweep::eval_parallel(z, s);
    const double tp = ms_since(t0);
    std::printf("%-18s %10zu %12.1f %12.1f %8.2f %10.3g\n", "expr_eval", n, ts,
                tp, ts / tp, max_gap(a, b));
  }

  {
    const std::size_t n = 4000;
    const tfcore::FrequencyGrid grid =
        tfcore::FrequencyGrid::log_spaced(0.1, 1000.0, n);
    const std::vector<double> w = grid.omegas();

    auto t0 = std::chrono::steady_clock::now();
    const sweep::GridEval a = sweep::nodal_serial(m, nodal::Port::FaultNode, w);
    const double ts = ms_since(t0);
    t0 = std::chrono::steady_clock::now();
    const sweep::GridEval b =
        sweep::nodal_parallel(m, nodal::Port::FaultNode, w);
    const double tp = ms_since(t0);
    std::printf("%-18s %10zu %12.1f %12.1f %8.2f %10.3g\n", "nodal_solve", n,
                ts, tp, ts / tp, max_gap(a, b));
  }

  return 0;
}
