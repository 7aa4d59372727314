#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "walklab/rng.hpp"
#include "walklab/stable.hpp"

// Walk increments in the domain of attraction of a stable law, path
// generation, and the path functionals S_n, L_n, M_n, tau_n.

namespace walklab::walk {

enum class Family { gaussian, exact_stable, tail_equivalent, logistic_logit };

// A sampleable, density-bearing, mean-centered step law together with its
// attraction parameters and norming sequences. All supported families are
// absolutely continuous with bounded density.
class IncrementModel {
 public:
  static IncrementModel gaussian(double sigma2);
  static IncrementModel exact_stable(stable::StableParams p);
  // Density equal to the exact stable one beyond |x| = crossover and a
  // smooth tilted bump inside, normalized and (for alpha > 1) re-centered
  // at construction so the attraction data stays that of `p`.
  static IncrementModel tail_equivalent(stable::StableParams p,
                                        double crossover);
  // Logistic steps (scale 1); log-mean link to offspring laws in the
  // branching module. Attraction is Gaussian with c = pi^2/6.
  static IncrementModel logistic_logit();

  Family family() const { return family_; }
  const stable::StableParams& attraction() const { return attraction_; }
  stable::ScalingSequence scaling() const {
    return stable::scaling_for(attraction_);
  }
  double density_at_zero() const { return g0_; }
  double rho() const { return rho_; }
  const std::string& name() const { return name_; }

  double sample(rng::RandomStream& stream) const;
  double density(double x) const;

  // P(|X| > t) for t >= crossover, where the tail is exactly stable.
  double tail_prob_abs(double t) const;

 private:
  IncrementModel() = default;

  Family family_ = Family::gaussian;
  stable::StableParams attraction_{};
  double sigma_ = 1.0;       // gaussian
  double crossover_ = 0.0;   // tail_equivalent
  double bump_mass_ = 0.0;   // mass inside [-crossover, crossover]
  double bump_tilt_ = 0.0;   // sine tilt fixing the mean
  double g0_ = 0.0;
  double rho_ = 0.5;
  std::string name_;
};

// Path functionals over S_1..S_n with S_0 = start. tau_n (the first index
// attaining min(0, L_n), with S_0 = 0 counting as index 0) is defined only
// for walks started at 0.
struct PathSummary {
  uint64_t n = 0;
  double start = 0.0;
  double s_n = 0.0;
  double min_s = 0.0;  // L_n = min(S_1..S_n)
  double max_s = 0.0;  // M_n = max(S_1..S_n)
  std::vector<double> partial_sums;  // filled only when requested

  uint64_t tau() const {
    if (!tau_valid_) throw std::logic_error("tau_n undefined for start != 0");
    return tau_;
  }
  double s_tau() const {
    if (!tau_valid_) throw std::logic_error("tau_n undefined for start != 0");
    return s_tau_;
  }
  bool has_tau() const { return tau_valid_; }

  uint64_t tau_ = 0;
  double s_tau_ = 0.0;
  bool tau_valid_ = false;
};

// O(1)-memory running summary; the only place the tau_n convention lives.
class PathTracker {
 public:
  explicit PathTracker(double start = 0.0) : sum_(start) {}

  void step(double increment) {
    sum_ += increment;
    ++k_;
    if (sum_ < min_) {
      min_ = sum_;
      argmin_ = k_;
    }
    if (sum_ > max_) max_ = sum_;
  }

  uint64_t steps() const { return k_; }
  double sum() const { return sum_; }
  double min() const { return min_; }
  double max() const { return max_; }

  // First index, 1-based over steps taken. min(0, L_n) compares against
  // S_0 = 0, so an all-nonnegative path has tau = 0.
  uint64_t tau() const { return min_ < 0.0 ? argmin_ : 0; }
  double s_tau() const { return min_ < 0.0 ? min_ : 0.0; }

 private:
  double sum_ = 0.0;
  double min_ = std::numeric_limits<double>::infinity();
  double max_ = -std::numeric_limits<double>::infinity();
  uint64_t argmin_ = 0;
  uint64_t k_ = 0;
};

PathSummary generate_path(const IncrementModel& model, uint64_t n,
                          double start_x, rng::RandomStream& stream,
                          bool keep_partial_sums = false);

// Summary for a given increment sequence (used by tests and duality checks).
PathSummary summarize_increments(std::span<const double> increments,
                                 double start_x,
                                 bool keep_partial_sums = false);

std::vector<double> reverse_path(std::span<const double> increments);

}  // namespace walklab::walk
