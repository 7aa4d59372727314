#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "walklab/estimate.hpp"
#include "walklab/parallel.hpp"
#include "walklab/renewal.hpp"
#include "walklab/rng.hpp"
#include "walklab/walk.hpp"

// Direct Monte Carlo estimators for the functionals
// E[e^{theta S_{tau_n}}; S_n <= h(n)] and their relatives, the plug-in
// evaluators of the matching asymptotic formulas, and the ratio-convergence
// experiment runner.

namespace walklab::functionals {

class budget_refused : public std::runtime_error {
 public:
  budget_refused(const std::string& what, std::string report_text)
      : std::runtime_error(what), report(std::move(report_text)) {}
  std::string report;
};

// Constraint sequences h(n): positive phi(n) -> +inf, negative psi(n) ->
// -inf (both o(a_n)), or a fixed level K.
struct ConstraintSpec {
  enum class Kind { upper_bound_positive, upper_bound_negative, fixed_K };
  enum class Family { power, log_power, constant };

  Kind kind = Kind::fixed_K;
  Family family = Family::constant;
  double param = 0.0;  // exponent delta, log power p, or the constant K

  double eval(uint64_t n) const;
  std::string describe() const;

  // power families require delta in (0, 1/alpha) so that n^delta = o(a_n)
  static ConstraintSpec phi_power(double delta, double alpha);
  static ConstraintSpec psi_power(double delta, double alpha);
  static ConstraintSpec phi_log_power(double p);
  static ConstraintSpec psi_log_power(double p);
  static ConstraintSpec fixed(double K);

  // the spec'd default exponent
  static double default_delta(double alpha);
};

struct McOptions {
  rng::StreamFamily streams;
  par::ExecPolicy exec;
};

// ---- left-hand sides (replica means; integrands bounded by construction)

Estimate lhs_theorem1(const walk::IncrementModel& model, double theta,
                      const ConstraintSpec& phi, uint64_t n, uint64_t replicas,
                      const McOptions& mc);

Estimate lhs_theorem2(const walk::IncrementModel& model, double theta, double x,
                      const ConstraintSpec& psi, uint64_t n, uint64_t replicas,
                      const McOptions& mc);

Estimate lhs_corollary_vatvat(const walk::IncrementModel& model, double theta,
                              const ConstraintSpec& psi, uint64_t n,
                              uint64_t replicas, const McOptions& mc);

Estimate lhs_theorem3(const walk::IncrementModel& model, double theta,
                      const ConstraintSpec& psi, uint64_t n, uint64_t replicas,
                      const McOptions& mc);

Estimate lhs_theorem4(const walk::IncrementModel& model, double theta, double K,
                      uint64_t n, uint64_t replicas, const McOptions& mc);

Estimate lhs_maxsmall(const walk::IncrementModel& model, double theta, double x,
                      uint64_t n, uint64_t replicas, const McOptions& mc);

// P(S_n <= x_upper, L_n >= 0)
Estimate conditioned_prob(const walk::IncrementModel& model, uint64_t n,
                          double x_upper, uint64_t replicas,
                          const McOptions& mc);

// ---- right-hand sides (plug-in products over renewal tables)

struct RhsValue {
  double value = 0.0;
  double err = 0.0;  // propagated table uncertainty
};

RhsValue rhs_theorem1(const walk::IncrementModel& model, double theta,
                      const ConstraintSpec& phi, uint64_t n,
                      const renewal::RenewalTable& U,
                      const renewal::RenewalTable& V);

RhsValue rhs_theorem2(const walk::IncrementModel& model, double theta, double x,
                      const ConstraintSpec& psi, uint64_t n,
                      const renewal::RenewalTable& U,
                      const renewal::RenewalTable& V);

RhsValue rhs_corollary_vatvat(const walk::IncrementModel& model, double theta,
                              const ConstraintSpec& psi, uint64_t n,
                              const renewal::RenewalTable& U);

RhsValue rhs_theorem3(const walk::IncrementModel& model, double theta,
                      const ConstraintSpec& psi, uint64_t n,
                      const renewal::RenewalTable& U,
                      const renewal::RenewalTable& V0);

// Limit of E[e^{theta S_{tau_n}}; S_n <= K] / b_n: Stieltjes sum over the
// U-increments (unit atom at 0 explicit) plus the absolutely continuous
// second term.
RhsValue rhs_theorem4(const walk::IncrementModel& model, double theta, double K,
                      const renewal::RenewalTable& U,
                      const renewal::RenewalTable& V,
                      const renewal::RenewalTable& V0);

RhsValue rhs_maxsmall(const walk::IncrementModel& model, double theta, double x,
                      uint64_t n, const renewal::RenewalTable& U,
                      const renewal::RenewalTable& V);

RhsValue rhs_integvw(const walk::IncrementModel& model, uint64_t n,
                     double x_upper, const renewal::RenewalTable& V);

// ---- ratio experiments

enum class TheoremId {
  theorem1,
  theorem2,
  theorem3,
  theorem4,
  corollary_vatvat,
  maxsmall,
  integvw,
};

std::string theorem_name(TheoremId id);

struct ExperimentParams {
  double theta = 1.0;
  double x = 0.0;  // start for theorem2 / maxsmall
  double K = 0.0;  // level for theorem4
  std::optional<ConstraintSpec> constraint;
};

struct Budget {
  uint64_t replicas = 0;  // 0 = auto-size from pilot
  double target_rel_stderr = 0.05;
  uint64_t pilot_replicas = 200000;
  uint64_t max_replicas = 1000000000;  // refusal threshold
};

struct RatioRow {
  uint64_t n = 0;
  Estimate lhs;
  double rhs = 0.0;
  double rhs_err = 0.0;
  double ratio = 0.0;
  double ratio_stderr = 0.0;
};

struct RatioReport {
  TheoremId theorem = TheoremId::theorem1;
  double theta = 0.0;
  std::string constraint_desc;
  uint64_t seed = 0;
  std::vector<RatioRow> rows;

  void write_csv(std::ostream& os) const;
};

struct Tables {
  const renewal::RenewalTable* U = nullptr;
  const renewal::RenewalTable* V = nullptr;
  const renewal::RenewalTable* V0 = nullptr;
};

RatioReport run_ratio_experiment(TheoremId id, const walk::IncrementModel& model,
                                 const ExperimentParams& params,
                                 const std::vector<uint64_t>& n_grid,
                                 const Budget& budget, const Tables& tables,
                                 const McOptions& mc);

// ---- reverse-path duality

// Pathwise check of the {tau_n = n} <-> {M_n < 0 on the reversed path}
// correspondence. Increments are snapped to 2^-26 units so partial sums are
// exact in binary64 and the two evaluations agree bit for bit.
struct DualityCheck {
  uint64_t replicas = 0;
  uint64_t mismatches = 0;     // indicator disagreements (must be 0)
  double max_value_diff = 0.0; // |tau-form - M-form| over replicas (must be 0)
  Estimate tau_form;
  Estimate m_form;
};

DualityCheck run_pathwise_duality(const walk::IncrementModel& model,
                                  double theta, double psi_value, uint64_t n,
                                  uint64_t replicas, const McOptions& mc);

}  // namespace walklab::functionals
