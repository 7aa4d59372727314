#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "walklab/estimate.hpp"
#include "walklab/functionals.hpp"
#include "walklab/parallel.hpp"
#include "walklab/renewal.hpp"
#include "walklab/rng.hpp"

using namespace walklab;

namespace {

MeanAcc run_mean_kernel(uint64_t replicas, const par::ExecPolicy& exec) {
  const auto fam = rng::StreamFamily::make(99, "par_test");
  auto kernel = [&](uint64_t r, MeanAcc& acc) {
    rng::RandomStream s = fam.replica(r);
    double v = 0.0;
    for (int i = 0; i < 32; ++i) v += s.normal();
    acc.add(std::exp(-std::fabs(v)));
  };
  return par::replica_reduce<MeanAcc>(replicas, kernel, exec);
}

}  // namespace

TEST_CASE("serial and parallel reductions are bit-identical") {
  // replica counts straddling block boundaries
  for (uint64_t reps : {1000ull, par::kBlockSize, 3 * par::kBlockSize + 17}) {
    const MeanAcc serial = run_mean_kernel(reps, {false, 0});
    for (int workers : {1, 2, 5}) {
      const MeanAcc par_acc = run_mean_kernel(reps, {true, workers});
      CHECK(par_acc.sum == serial.sum);
      CHECK(par_acc.sum_sq == serial.sum_sq);
      CHECK(par_acc.n == serial.n);
    }
  }
}

TEST_CASE("renewal tables identical across engines and worker counts") {
  const auto model = walk::IncrementModel::gaussian(1.0);
  const auto fam = rng::StreamFamily::make(7, "par_renewal");
  std::vector<double> grid;
  for (double x = 0; x <= 8.0001; x += 0.5) grid.push_back(x);

  const auto serial =
      renewal::estimate_U(model, grid, 40000, 200000, fam, {false, 0}, false);
  for (int workers : {1, 2, 3}) {
    const auto par_tab =
        renewal::estimate_U(model, grid, 40000, 200000, fam, {true, workers}, false);
    CHECK(par_tab.values == serial.values);
    CHECK(par_tab.raw_values == serial.raw_values);
    CHECK(par_tab.stderrs == serial.stderrs);
    CHECK(par_tab.censor_frac == serial.censor_frac);
  }
}

TEST_CASE("functional estimates identical across engines") {
  const auto model = walk::IncrementModel::gaussian(1.0);
  const auto c = functionals::ConstraintSpec::phi_power(0.45, 2.0);
  functionals::McOptions serial{rng::StreamFamily::make(21, "par_fn"), {false, 0}};
  const Estimate a = functionals::lhs_theorem1(model, 1.0, c, 64, 100000, serial);
  for (int workers : {1, 2, 4}) {
    functionals::McOptions par_mc{rng::StreamFamily::make(21, "par_fn"),
                                  {true, workers}};
    const Estimate b = functionals::lhs_theorem1(model, 1.0, c, 64, 100000, par_mc);
    CHECK(b.value == a.value);
    CHECK(b.stderror == a.stderror);
  }
}
