#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "walklab/estimate.hpp"
#include "walklab/parallel.hpp"
#include "walklab/renewal.hpp"
#include "walklab/rng.hpp"
#include "walklab/walk.hpp"

// Critical branching processes in random environment. Each generation draws
// an offspring law with mean e^X from the link, so the associated walk has
// increments X = log F'(1) exactly. Survival under the constraint S_n <= K
// is estimated jointly with the walk functionals, and the h-transformed
// measures P+/P- are realized by reweighting with the renewal tables.

namespace walklab::bpre {

enum class OffspringFamily { geometric_link, poisson_link };

// Population cap: saturating absorption with a per-replica flag; capped
// replicas count as surviving (z > 0 is all the survival event needs).
constexpr uint64_t kPopulationCap = 1000000000000ull;

// One generation's reproduction law, determined by the link and the walk
// increment x. geometric: success parameter p = 1/(1+e^x); poisson: mean e^x.
struct OffspringLaw {
  OffspringFamily family = OffspringFamily::geometric_link;
  double x = 0.0;

  double mean() const;
  uint64_t draw_one(rng::RandomStream& stream) const;
  // Standardized truncated second moment sum_{k>=b} k^2 F({k}) / (EF)^2.
  double gamma_b(uint64_t b) const;
};

struct EnvironmentModel {
  OffspringFamily family = OffspringFamily::geometric_link;
  walk::IncrementModel driver;

  static EnvironmentModel geometric(walk::IncrementModel driver);
  static EnvironmentModel poisson(walk::IncrementModel driver);
};

OffspringLaw sample_environment(const EnvironmentModel& model,
                                rng::RandomStream& stream);

// Sum of z i.i.d. offspring draws (negative binomial via gamma-poisson for
// the geometric link, a single Poisson for the poisson link); saturates at
// kPopulationCap and sets `capped`.
uint64_t step_population(uint64_t z, const OffspringLaw& law,
                         rng::RandomStream& stream, bool& capped);

struct McOptions {
  rng::StreamFamily streams;
  par::ExecPolicy exec;
};

// Monte Carlo estimate of E[(log+ gamma(b))^{alpha+eps}] over environments
// (Condition B2 diagnostic; reported, not asserted).
Estimate b2_diagnostic(const EnvironmentModel& model, uint64_t b, double eps,
                       uint64_t replicas, const McOptions& mc);

struct SurvivalRow {
  uint64_t n = 0;
  double K = 0.0;
  uint64_t J = 0;
  Estimate raw;             // P(Z_n > 0, S_n <= K)
  double normalized = 0.0;  // raw / b_n of the driver scaling
  double bucket_left = 0.0, bucket_mid = 0.0, bucket_right = 0.0;
  double bound_mean = 0.0;  // MC mean of e^{S_tau} 1{S_n <= K}, shared replicas
  double bound_stderr = 0.0;
  double capped_frac = 0.0;
  uint64_t replicas = 0;
  uint64_t seed = 0;
};

struct SurvivalReport {
  std::vector<SurvivalRow> rows;
  void write_csv(std::ostream& os) const;
};

// Frequency of {Z_n > 0, S_n <= K} with tau_n-bucket attribution over
// [0,J], (J, n-J], (n-J, n]; bucket masses sum to the raw frequency by
// construction. Requires n > 2J.
SurvivalRow survival_constrained(const EnvironmentModel& model, uint64_t n,
                                 double K, uint64_t replicas, uint64_t J,
                                 const McOptions& mc);

Estimate survival_unconstrained(const EnvironmentModel& model, uint64_t n,
                                uint64_t replicas, const McOptions& mc);

// P(S_n <= 0 | Z_n > 0): the conditional walk marginal should live on the
// positive side at the a_n scale.
Estimate conditional_nonpositive_fraction(const EnvironmentModel& model,
                                          uint64_t n, uint64_t replicas,
                                          const McOptions& mc);

// Path functional for the h-transform expectations: sees the walk
// increments, partial sums, and a scratch stream for any embedded
// randomness (e.g. running a population on the realized environment).
struct PathContext {
  std::span<const double> increments;
  std::span<const double> partial_sums;  // S_1..S_n with S_0 = start
  double start = 0.0;
  rng::RandomStream* aux = nullptr;
};
using PathFunctional = std::function<double(const PathContext&)>;

// E_x+[g] = E_x[g U(S_n); L_n >= 0] / U(x), x >= 0.
Estimate plus_measure_expectation(const walk::IncrementModel& driver,
                                  const PathFunctional& g, double x, uint64_t n,
                                  uint64_t replicas,
                                  const renewal::RenewalTable& U,
                                  const McOptions& mc);

// E_x-[g] = E_x[g V(S_n); M_n < 0] / V(x), x <= 0.
Estimate minus_measure_expectation(const walk::IncrementModel& driver,
                                   const PathFunctional& g, double x, uint64_t n,
                                   uint64_t replicas,
                                   const renewal::RenewalTable& V,
                                   const McOptions& mc);

struct MartingaleTrack {
  std::vector<uint64_t> checkpoints;  // generation indices
  std::vector<Estimate> w_mean;       // P+-weighted means of W = Z e^{-S}
  Estimate positive_fraction_last;    // P+ fraction of W > 1e-3 at the end
};

MartingaleTrack martingale_W_track(const EnvironmentModel& model, double x,
                                   const std::vector<uint64_t>& checkpoints,
                                   uint64_t replicas,
                                   const renewal::RenewalTable& U,
                                   const McOptions& mc);

}  // namespace walklab::bpre
