// Compares the OpenMP kernels against their serial reference paths:
// Monte Carlo path sampling and the tail-estimate grid map.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "perptail/montecarlo.hpp"
#include "perptail/tailcalc.hpp"

using namespace perptail;

namespace {

template <class F>
double time_seconds(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

int main() {
  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  std::printf("perptail benchmark (%d threads)\n", threads);
  std::printf("%-28s %12s %12s %9s\n", "kernel", "serial [s]", "parallel [s]", "speedup");

  {
    SimConfig config;
    config.alpha = 1.0;
    config.law = QLaw::point_mass(1.0);
    config.n_paths = 2'000'000;
    config.seed = 7;
    config.mgf_points = {0.5, 1.0};
    SimSummary serial_summary, parallel_summary;
    const double ts = time_seconds([&] { serial_summary = simulate(config, Exec::serial); });
    const double tp = time_seconds([&] { parallel_summary = simulate(config, Exec::parallel); });
    std::printf("%-28s %12.3f %12.3f %8.2fx  (bit-identical: %s)\n", "mc-paths 2e6",
                ts, tp, ts / tp,
                serial_summary.mean == parallel_summary.mean &&
                        serial_summary.variance == parallel_summary.variance
                    ? "yes"
                    : "NO");
  }

  {
    const QLaw law = QLaw::gamma_shift(1.0, 1.0, 1.0);
    const std::vector<double> ts_grid = make_grid(10.0, 1e12, 2000, true);
    std::vector<TailEstimate> a, bvec;
    const double ts = time_seconds([&] { a = tail_grid(1.0, law, ts_grid, Exec::serial); });
    const double tp = time_seconds([&] { bvec = tail_grid(1.0, law, ts_grid, Exec::parallel); });
    bool identical = a.size() == bvec.size();
    for (std::size_t i = 0; identical && i < a.size(); ++i)
      identical = a[i].log_tail == bvec[i].log_tail;
    std::printf("%-28s %12.3f %12.3f %8.2fx  (bit-identical: %s)\n", "tail-grid 2000 pts",
                ts, tp, ts / tp, identical ? "yes" : "NO");
  }
  return 0;
}
