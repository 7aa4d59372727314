#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "support/oracles.hpp"
#include "walklab/walk.hpp"

using namespace walklab;
using walk::IncrementModel;

TEST_CASE("path summary hand examples") {
  const std::vector<double> inc = {1, -2, 3};
  const auto s = walk::summarize_increments(inc, 0.0);
  CHECK(s.s_n == 2.0);
  CHECK(s.min_s == -1.0);
  CHECK(s.max_s == 2.0);
  CHECK(s.tau() == 2);
  CHECK(s.s_tau() == -1.0);

  const auto pos = walk::summarize_increments(std::vector<double>{0.5, 1.0, 0.25}, 0.0);
  CHECK(pos.tau() == 0);
  CHECK(pos.s_tau() == 0.0);

  const auto neg = walk::summarize_increments(std::vector<double>{-0.5, -1.0, -0.25}, 0.0);
  CHECK(neg.tau() == 3);
  CHECK(neg.s_tau() == neg.min_s);

  // first attainment on exact ties
  const auto tie = walk::summarize_increments(std::vector<double>{-1.0, 0.5, -0.5}, 0.0);
  CHECK(tie.min_s == -1.0);
  CHECK(tie.tau() == 1);
}

TEST_CASE("generate_path argument validation") {
  const auto model = IncrementModel::gaussian(1.0);
  rng::RandomStream s = rng::RandomStream::for_replica(1, "walk", 0);
  CHECK_THROWS_AS(walk::generate_path(model, 0, 0.0, s), std::invalid_argument);
  const auto shifted = walk::generate_path(model, 8, -2.0, s);
  CHECK(!shifted.has_tau());
  CHECK_THROWS_AS(shifted.tau(), std::logic_error);
  CHECK_THROWS_AS(shifted.s_tau(), std::logic_error);
  const auto zero = walk::generate_path(model, 8, 0.0, s);
  CHECK(zero.has_tau());
  CHECK(zero.min_s <= zero.s_n);
  CHECK(zero.max_s >= zero.s_n);
}

TEST_CASE("partial sums kept on request and consistent") {
  const auto model = IncrementModel::gaussian(1.0);
  rng::RandomStream s = rng::RandomStream::for_replica(2, "walk", 5);
  const auto p = walk::generate_path(model, 64, 0.0, s, true);
  REQUIRE(p.partial_sums.size() == 64);
  double mn = p.partial_sums[0], mx = p.partial_sums[0];
  for (double v : p.partial_sums) {
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  CHECK(p.min_s == mn);
  CHECK(p.max_s == mx);
  CHECK(p.s_n == p.partial_sums.back());
  for (double v : p.partial_sums) {
    CHECK(p.min_s <= v);
    CHECK(p.max_s >= v);
  }
  // s_tau = min(0, L_n), first attainment
  CHECK(p.s_tau() == std::min(0.0, p.min_s));
}

TEST_CASE("reverse_path basics") {
  const std::vector<double> inc = {1, -2, 3};
  CHECK(walk::reverse_path(inc) == std::vector<double>{3, -2, 1});
  CHECK(walk::reverse_path(walk::reverse_path(inc)) == inc);
  CHECK_THROWS_AS(walk::reverse_path(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("duality event translation on all sign patterns") {
  // Exactly representable, distinct magnitudes; all 8 sign patterns of a
  // 3-step path.
  const std::array<double, 3> mag = {1.25, 2.5, 3.75};
  for (int mask = 0; mask < 8; ++mask) {
    std::vector<double> inc(3);
    for (int i = 0; i < 3; ++i)
      inc[i] = (mask >> i & 1) ? mag[i] : -mag[i];
    const auto fwd = walk::summarize_increments(inc, 0.0);
    const auto bwd = walk::summarize_increments(walk::reverse_path(inc), 0.0);
    const bool tau_at_n = fwd.tau() == 3;
    const bool rev_max_neg = bwd.max_s < 0.0;
    CHECK(tau_at_n == rev_max_neg);
    CHECK(fwd.s_n == bwd.s_n);  // exact: sums of representable values
  }
}

TEST_CASE("increment model moments") {
  rng::RandomStream s = rng::RandomStream::for_replica(3, "walk_moments", 0);
  const auto gauss = IncrementModel::gaussian(1.0);
  const int n = 1000000;
  double m = 0;
  for (int i = 0; i < n; ++i) m += gauss.sample(s);
  CHECK(std::fabs(m / n) < 4e-3);

  const auto st = IncrementModel::exact_stable(stable::make_stable_params(1.5, 0, 1));
  int below = 0;
  for (int i = 0; i < n; ++i)
    if (st.sample(s) < 0) ++below;
  CHECK(std::fabs(below / double(n) - 0.5) < 4.0 * std::sqrt(0.25 / n));

  const auto lg = IncrementModel::logistic_logit();
  double lm = 0, lm2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = lg.sample(s);
    lm += x;
    lm2 += x * x;
  }
  lm /= n;
  const double var = lm2 / n - lm * lm;
  CHECK(std::fabs(lm) < 4.0 * std::sqrt(var / n));
  CHECK(var == doctest::Approx(3.28986813369645287).epsilon(0.02));  // pi^2/3
}

TEST_CASE("tail_equivalent: construction, density, tails") {
  const auto p = stable::make_stable_params(1.5, 0.2, 1.0);
  const auto model = IncrementModel::tail_equivalent(p, 5.0);

  // density matches the stable one beyond the crossover
  CHECK(model.density(7.0) == doctest::Approx(stable::density(p, 7.0)).epsilon(1e-9));
  CHECK(model.density(-9.0) == doctest::Approx(stable::density(p, -9.0)).epsilon(1e-9));

  // nonnegative, integrates to 1 (bump mass + stable tails)
  double min_density = 1e9;
  for (int i = 0; i <= 100; ++i)
    min_density = std::min(min_density, model.density(-5.0 + 0.1 * i));
  CHECK(min_density >= 0.0);
  const double bump_mass = oracles::integrate(
      [&](double x) { return model.density(x); }, -5.0, 5.0, 1e-10);
  CHECK(bump_mass + model.tail_prob_abs(5.0) == doctest::Approx(1.0).epsilon(1e-7));

  // the tilt centers the law: first moment of the bump equals the stable
  // law's inner first moment
  const double bump_mean = oracles::integrate(
      [&](double x) { return x * model.density(x); }, -5.0, 5.0, 1e-10);
  const double inner_mean = oracles::integrate(
      [&](double x) { return x * stable::density(p, x); }, -5.0, 5.0, 1e-10);
  CHECK(bump_mean == doctest::Approx(inner_mean).epsilon(1e-4));

  // tail frequencies match the model's own tail at t in {10, 20, 40}
  rng::RandomStream s = rng::RandomStream::for_replica(4, "tail_eq", 0);
  const int n = 1000000;
  int c10 = 0, c20 = 0, c40 = 0;
  for (int i = 0; i < n; ++i) {
    const double ax = std::fabs(model.sample(s));
    c10 += ax > 10;
    c20 += ax > 20;
    c40 += ax > 40;
  }
  for (auto [t, cnt] : {std::pair{10.0, c10}, {20.0, c20}, {40.0, c40}}) {
    const double want = model.tail_prob_abs(t);
    const double se = std::sqrt(want * (1 - want) / n);
    CHECK(std::fabs(cnt / double(n) - want) < 3.0 * se);
  }
}

TEST_CASE("tail_equivalent rejects degenerate configs") {
  const auto p = stable::make_stable_params(1.5, 0.2, 1.0);
  CHECK_THROWS_AS(IncrementModel::tail_equivalent(p, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(IncrementModel::tail_equivalent(p, 1e-4), std::invalid_argument);
}

TEST_CASE("sparre-andersen and reflection at small n") {
  // Distribution-free for continuous symmetric increments.
  for (const auto& model :
       {IncrementModel::gaussian(1.0),
        IncrementModel::exact_stable(stable::make_stable_params(1.5, 0, 1))}) {
    const int reps = 200000, nmax = 8;
    std::vector<int> lpos(nmax + 1, 0), mneg(nmax + 1, 0);
    for (int r = 0; r < reps; ++r) {
      rng::RandomStream s = rng::RandomStream::for_replica(5, "sa_small", r);
      walk::PathTracker t;
      for (int k = 1; k <= nmax; ++k) {
        t.step(model.sample(s));
        if (t.min() >= 0.0) ++lpos[k];
        if (t.max() < 0.0) ++mneg[k];
      }
    }
    for (int k = 1; k <= nmax; ++k) {
      const double want = oracles::sparre_andersen(k);
      const double se = std::sqrt(want * (1 - want) / reps);
      CHECK(std::fabs(lpos[k] / double(reps) - want) < 4.0 * se);
      CHECK(std::fabs(mneg[k] / double(reps) - want) < 4.0 * se);
    }
  }
}
