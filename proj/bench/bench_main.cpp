#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "walklab/bpre.hpp"
#include "walklab/functionals.hpp"
#include "walklab/renewal.hpp"

// Serial reference vs OpenMP replica kernels on three representative
// workloads. The merged results are bit-identical by construction; this
// target reports the speed difference only.

using namespace walklab;
using Clock = std::chrono::steady_clock;

namespace {

template <class F>
double time_s(F&& f) {
  const auto t0 = Clock::now();
  f();
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(const std::string& name, double serial_s,
            const std::vector<std::pair<int, double>>& parallel_s) {
  std::printf("%-28s serial %8.3f s", name.c_str(), serial_s);
  for (const auto& [w, t] : parallel_s)
    std::printf(" | %d workers %8.3f s (x%.2f)", w, t, serial_s / t);
  std::printf("\n");
}

}  // namespace

int main(int argc, char** argv) {
  uint64_t scale = 1;
  if (argc > 1) scale = std::stoull(argv[1]);

  int max_workers = 2;
#ifdef _OPENMP
  max_workers = omp_get_max_threads();
#endif
  std::vector<int> worker_counts;
  for (int w = 2; w <= max_workers; w *= 2) worker_counts.push_back(w);
  if (worker_counts.empty()) worker_counts.push_back(2);

  const auto model = walk::IncrementModel::gaussian(1.0);
  const auto streams = rng::StreamFamily::make(20240817, "bench");

  {
    const uint64_t reps = 400000 * scale;
    const uint64_t n = 256;
    auto constraint = functionals::ConstraintSpec::phi_power(0.45, 2.0);
    auto run = [&](par::ExecPolicy exec) {
      functionals::McOptions mc{streams, exec};
      functionals::lhs_theorem1(model, 1.0, constraint, n, reps, mc);
    };
    const double ts = time_s([&] { run({false, 0}); });
    std::vector<std::pair<int, double>> tp;
    for (int w : worker_counts)
      tp.emplace_back(w, time_s([&] { run({true, w}); }));
    report("walk functional (n=256)", ts, tp);
  }

  {
    const uint64_t reps = 40000 * scale;
    std::vector<double> grid;
    for (double x = 0; x <= 40.0001; x += 0.5) grid.push_back(x);
    auto run = [&](par::ExecPolicy exec) {
      renewal::estimate_U(model, grid, reps, 1000000, streams.sub("U"), exec,
                          false);
    };
    const double ts = time_s([&] { run({false, 0}); });
    std::vector<std::pair<int, double>> tp;
    for (int w : worker_counts)
      tp.emplace_back(w, time_s([&] { run({true, w}); }));
    report("renewal table (stopped)", ts, tp);
  }

  {
    const uint64_t reps = 400000 * scale;
    const auto env = bpre::EnvironmentModel::geometric(model);
    auto run = [&](par::ExecPolicy exec) {
      bpre::McOptions mc{streams.sub("bpre"), exec};
      bpre::survival_constrained(env, 256, 0.0, reps, 16, mc);
    };
    const double ts = time_s([&] { run({false, 0}); });
    std::vector<std::pair<int, double>> tp;
    for (int w : worker_counts)
      tp.emplace_back(w, time_s([&] { run({true, w}); }));
    report("bpre survival (n=256)", ts, tp);
  }

  return 0;
}
