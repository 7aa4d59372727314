#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "support/oracles.hpp"
#include "walklab/stable.hpp"

using namespace walklab;
using stable::make_stable_params;

namespace {
constexpr double kPi = 3.14159265358979323846;

double arctan_rho(double alpha, double beta) {
  return 0.5 + std::atan(beta * std::tan(kPi * alpha / 2.0)) / (kPi * alpha);
}
}  // namespace

TEST_CASE("admissible set membership") {
  CHECK_NOTHROW(make_stable_params(2, 0, 0.5));
  CHECK_NOTHROW(make_stable_params(1.5, 0.4, 1));
  CHECK_NOTHROW(make_stable_params(1, 0, 1));
  CHECK_NOTHROW(make_stable_params(0.5, -0.9, 2));
  CHECK_THROWS_AS(make_stable_params(1, 0.3, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_stable_params(2, 0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_stable_params(1.5, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_stable_params(1.5, -1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_stable_params(2.4, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_stable_params(0, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_stable_params(1.5, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_stable_params(1.5, 0, -1), std::invalid_argument);
}

TEST_CASE("density closed forms") {
  // Gaussian member: c = 1/2 is the standard normal.
  const auto g = make_stable_params(2, 0, 0.5);
  CHECK(stable::density(g, 0) == doctest::Approx(1.0 / std::sqrt(2 * kPi)).epsilon(1e-9));
  CHECK(stable::density(g, 1.3) ==
        doctest::Approx(std::exp(-0.845) / std::sqrt(2 * kPi)).epsilon(1e-9));

  const auto cauchy = make_stable_params(1, 0, 1);
  CHECK(stable::density(cauchy, 0) == doctest::Approx(1.0 / kPi).epsilon(1e-9));
  CHECK(stable::density(cauchy, 2) ==
        doctest::Approx(1.0 / (kPi * 5.0)).epsilon(1e-8));

  // beta = 0: g(0) = Gamma(1 + 1/alpha) / (pi c^{1/alpha}).
  for (double alpha : {0.5, 0.75, 1.5, 1.9}) {
    for (double c : {1.0, 2.5}) {
      const auto p = make_stable_params(alpha, 0, c);
      const double want =
          std::tgamma(1.0 + 1.0 / alpha) / (kPi * std::pow(c, 1.0 / alpha));
      CHECK(std::fabs(stable::density_at_zero(p) - want) < 1e-8);
    }
  }
}

TEST_CASE("density symmetry in beta at zero") {
  for (double alpha : {0.6, 1.2, 1.5, 1.9}) {
    const auto a = make_stable_params(alpha, 0.4, 1.0);
    const auto b = make_stable_params(alpha, -0.4, 1.0);
    CHECK(std::fabs(stable::density_at_zero(a) - stable::density_at_zero(b)) < 1e-10);
  }
}

TEST_CASE("density is nonnegative and integrates to one") {
  for (auto [alpha, beta] : std::vector<std::pair<double, double>>{
           {2.0, 0.0}, {1.5, 0.5}, {0.75, -0.4}}) {
    const auto p = make_stable_params(alpha, beta, 1.0);
    // Choose a window holding all but ~1e-8 of the mass, via the cdf.
    double hi = 4.0;
    while (stable::cdf(p, hi) < 1.0 - 5e-9) hi *= 2.0;
    double lo = -4.0;
    while (stable::cdf(p, lo) > 5e-9) lo *= 2.0;
    for (int i = 0; i <= 64; ++i) {
      const double x = lo + (hi - lo) * i / 64.0;
      CHECK(stable::density_checked(p, x).value >= -1e-12);
    }
    const double mass = oracles::integrate(
        [&](double x) { return stable::density(p, x); }, lo, hi, 1e-9);
    const double outside = stable::cdf(p, lo) + 1.0 - stable::cdf(p, hi);
    CHECK(std::fabs(mass + outside - 1.0) < 1e-6);
  }
}

TEST_CASE("positivity parameter") {
  CHECK(stable::positivity_rho(make_stable_params(2, 0, 0.7)) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(stable::positivity_rho(make_stable_params(1.5, 0, 2)) == doctest::Approx(0.5).epsilon(1e-8));
  // Cross-check against the arctan formula, which the production path
  // never touches.
  for (auto [alpha, beta] : std::vector<std::pair<double, double>>{
           {1.5, 0.5}, {1.2, 0.3}, {0.75, -0.4}, {1.9, 0.8}, {0.5, 0.9}}) {
    const auto p = make_stable_params(alpha, beta, 1.3);
    const double rho = stable::positivity_rho(p);
    CHECK(rho > 0.0);
    CHECK(rho < 1.0);
    CHECK(rho == doctest::Approx(arctan_rho(alpha, beta)).epsilon(1e-8));
  }
}

TEST_CASE("sampler moments: gaussian member") {
  const auto g = make_stable_params(2, 0, 0.5);
  rng::RandomStream s = rng::RandomStream::for_replica(11, "stable_gauss", 0);
  const int n = 1000000;
  double m = 0, m2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = stable::sample_stable(g, s);
    m += x;
    m2 += x * x;
  }
  m /= n;
  m2 /= n;
  CHECK(std::fabs(m) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::fabs(m2 - 1.0) < 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("sampler median: symmetric stable") {
  const auto p = make_stable_params(1.5, 0, 1);
  rng::RandomStream s = rng::RandomStream::for_replica(12, "stable_median", 0);
  const int n = 1000000;
  int below = 0;
  for (int i = 0; i < n; ++i)
    if (stable::sample_stable(p, s) < 0.0) ++below;
  const double se = std::sqrt(0.25 / n);
  CHECK(std::fabs(below / static_cast<double>(n) - 0.5) < 4.0 * se);
}

TEST_CASE("sampler matches quadrature cdf (grid KS)") {
  struct Case {
    double alpha, beta, c;
    uint64_t draws;
    double d_bound;  // 0 = use the 1e-3 KS critical value
  };
  // Kolmogorov critical value at significance 1e-3: sqrt(-ln(5e-4)/2).
  const std::vector<Case> matrix = {
      {2.0, 0.0, 0.5, 200000, 0.0},  {1.5, 0.0, 1.0, 200000, 0.0},
      {1.5, 0.5, 1.0, 200000, 0.0},  {0.75, -0.4, 1.0, 200000, 0.0},
      {1.0, 0.0, 1.0, 200000, 0.0},  {1.9, 0.8, 2.0, 200000, 0.0},
      {1.2, 0.3, 1.0, 1000000, 0.002},
  };
  for (const auto& tc : matrix) {
    CAPTURE(tc.alpha);
    CAPTURE(tc.beta);
    const auto p = make_stable_params(tc.alpha, tc.beta, tc.c);
    rng::RandomStream s = rng::RandomStream::for_replica(13, "stable_ks", 0);
    std::vector<double> draws(tc.draws);
    for (auto& d : draws) d = stable::sample_stable(p, s);
    std::sort(draws.begin(), draws.end());
    // Empirical-quantile grid spanning [1%, 99%].
    double dmax = 0.0;
    const int grid_points = 99;
    for (int j = 1; j <= grid_points; ++j) {
      const size_t idx = static_cast<size_t>(
          (0.01 + 0.98 * (j - 1) / (grid_points - 1.0)) * (tc.draws - 1));
      const double x = draws[idx];
      const double emp = (idx + 1.0) / static_cast<double>(tc.draws);
      dmax = std::max(dmax, std::fabs(emp - stable::cdf(p, x)));
    }
    const double crit =
        tc.d_bound > 0.0
            ? tc.d_bound
            : std::sqrt(-std::log(5e-4) / 2.0) / std::sqrt(double(tc.draws));
    CHECK(dmax < crit);
  }
}

TEST_CASE("scaling sequences") {
  const auto s2 = stable::scaling_for(make_stable_params(2, 0, 0.5));
  CHECK(s2.a(1) == 1.0);
  CHECK(s2.b(1) == 1.0);
  CHECK(s2.a(100) == doctest::Approx(10.0));
  CHECK(s2.b(100) == doctest::Approx(1e-3));

  const auto s05 = stable::scaling_for(make_stable_params(0.5, 0, 1));
  CHECK(s05.a(16) == 256.0);
  CHECK(s05.b(16) == doctest::Approx(1.0 / 4096.0));

  // b_n = 1/(a_n n) bitwise by construction; the triple product sits within
  // one ulp of 1 (binary64 reciprocal rounding).
  for (const auto& sc : {s2, s05}) {
    for (uint64_t n = 1; n <= 1000000; n = n < 64 ? n + 1 : n * 5 / 4) {
      const double prod = sc.b(n) * sc.a(n) * static_cast<double>(n);
      CHECK(std::fabs(prod - 1.0) <= 3e-16);
      CHECK(sc.b(n) == 1.0 / (sc.a(n) * static_cast<double>(n)));
    }
    // monotone norming
    double prev = 0.0;
    for (uint64_t n = 1; n <= 2048; ++n) {
      CHECK(sc.a(n) > prev);
      prev = sc.a(n);
    }
  }
}
