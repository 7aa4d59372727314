#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "walklab/parallel.hpp"
#include "walklab/rng.hpp"
#include "walklab/walk.hpp"

// Monte Carlo estimation of the renewal functions
//
//   U(x)   = I{x>=0} + sum_n P(S_n >= -x, M_n < 0),
//   V(x)   = I{x<0}  + sum_n P(S_n <  -x, L_n >= 0),
//   V0(x)  = I{x<=0} + sum_n P(S_n <= -x, L_n >= 0),
//
// via stopped-path counting: the series for U equals the expected number of
// pre-exit visits to [-x, 0), where exit is the first nonnegative time (and
// symmetrically for V, V0 with the first negative time). One path serves
// the whole grid.

namespace walklab::renewal {

class table_error : public std::runtime_error {
 public:
  explicit table_error(const std::string& what) : std::runtime_error(what) {}
};

enum class Which { U, V, V0 };

std::string which_name(Which w);

struct TailFit {
  bool valid = false;
  double exponent = 0.0;  // regular-variation index fitted on the top decade
  double coef = 0.0;
  double expected_index = 0.0;  // alpha*rho for U, alpha*(1-rho) for V, V0
  double max_rel_stderr = 0.0;  // over the fitted points
};

struct RenewalTable {
  Which which = Which::U;
  double alpha = 2.0;
  double rho = 0.5;
  std::vector<double> grid;        // argument magnitudes, increasing, >= 0
  std::vector<double> values;      // isotonic
  std::vector<double> raw_values;  // before the monotone projection
  std::vector<double> stderrs;
  std::vector<double> trunc_bound;  // per-point censoring bias estimate
  double censor_frac = 0.0;         // replicas that hit n_max
  uint64_t replicas = 0;
  uint64_t n_max = 0;
  TailFit tail;

  // Piecewise-linear interpolation on the grid, regular-variation tail
  // beyond it (requires a valid fit).
  double value_at(double u) const;
  double stderr_at(double u) const;

  void write_csv(std::ostream& os) const;
};

// Grids: U takes nonnegative arguments, increasing; V/V0 take nonpositive
// arguments, decreasing (stored internally as magnitudes).
RenewalTable estimate_U(const walk::IncrementModel& model,
                        const std::vector<double>& grid, uint64_t replicas,
                        uint64_t n_max, const rng::StreamFamily& streams,
                        const par::ExecPolicy& exec = {},
                        bool enforce_bias_gate = true);

RenewalTable estimate_V(const walk::IncrementModel& model,
                        const std::vector<double>& grid_negatives,
                        uint64_t replicas, uint64_t n_max,
                        const rng::StreamFamily& streams,
                        const par::ExecPolicy& exec = {},
                        bool enforce_bias_gate = true);

RenewalTable estimate_V0(const walk::IncrementModel& model,
                         const std::vector<double>& grid_negatives,
                         uint64_t replicas, uint64_t n_max,
                         const rng::StreamFamily& streams,
                         const par::ExecPolicy& exec = {},
                         bool enforce_bias_gate = true);

struct Weight {
  enum class Kind { unit, exp_decay } kind = Kind::unit;
  double theta = 0.0;

  static Weight unit() { return Weight{Kind::unit, 0.0}; }
  static Weight exp_decay(double theta) {
    if (!(theta > 0.0)) throw std::invalid_argument("exp_decay needs theta > 0");
    return Weight{Kind::exp_decay, theta};
  }
};

struct IntegralResult {
  double value = 0.0;
  double err = 0.0;  // propagated table stderr (fully correlated bound)
};

// int_0^upper weight(z) * table(z) dz with piecewise-linear quadrature on
// the grid; the part beyond the grid is closed analytically with the
// regular-variation fit (incomplete gamma for the exponential weight).
// upper = infinity is allowed only for exp_decay.
IntegralResult integral_against_table(const RenewalTable& table,
                                      const Weight& weight, double upper);

}  // namespace walklab::renewal
