#include "walklab/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "walklab/detail/gk15.hpp"

namespace walklab::functionals {

namespace {

template <class PerReplica>
Estimate mc_mean(uint64_t replicas, const McOptions& mc, std::string_view tag,
                 PerReplica&& body) {
  if (replicas == 0) throw std::invalid_argument("replicas must be >= 1");
  const rng::StreamFamily fam = mc.streams.sub(tag);
  auto kernel = [&](uint64_t r, MeanAcc& acc) {
    rng::RandomStream stream = fam.replica(r);
    acc.add(body(stream));
  };
  MeanAcc acc = par::replica_reduce<MeanAcc>(replicas, kernel, mc.exec);
  return acc.estimate(mc.streams.master_seed);
}

void require_kind(const ConstraintSpec& c, ConstraintSpec::Kind kind,
                  const char* who) {
  if (c.kind != kind)
    throw std::invalid_argument(std::string(who) + ": wrong constraint kind (" +
                                c.describe() + ")");
}

// e^{theta s} with the S_tau <= 0 invariant enforced per replica.
double exp_tau_weight(double theta, double s_tau) {
  if (s_tau > 0.0)
    throw std::logic_error("S_tau > 0: tau bookkeeping violated");
  return std::exp(theta * s_tau);
}

}  // namespace

// ---- constraints

double ConstraintSpec::eval(uint64_t n) const {
  const double dn = static_cast<double>(n);
  switch (family) {
    case Family::power:
      return (kind == Kind::upper_bound_negative ? -1.0 : 1.0) *
             std::pow(dn, param);
    case Family::log_power:
      return (kind == Kind::upper_bound_negative ? -1.0 : 1.0) *
             std::pow(std::log(dn), param);
    case Family::constant:
      return param;
  }
  throw std::logic_error("unreachable");
}

std::string ConstraintSpec::describe() const {
  char buf[64];
  switch (family) {
    case Family::power:
      std::snprintf(buf, sizeof buf, "%sn^%g",
                    kind == Kind::upper_bound_negative ? "-" : "", param);
      break;
    case Family::log_power:
      std::snprintf(buf, sizeof buf, "%s(log n)^%g",
                    kind == Kind::upper_bound_negative ? "-" : "", param);
      break;
    case Family::constant:
      std::snprintf(buf, sizeof buf, "K=%g", param);
      break;
  }
  return buf;
}

static ConstraintSpec make_power(ConstraintSpec::Kind kind, double delta,
                                 double alpha) {
  if (!(delta > 0.0 && delta < 1.0 / alpha))
    throw std::invalid_argument(
        "power constraint needs 0 < delta < 1/alpha so n^delta = o(a_n)");
  return ConstraintSpec{kind, ConstraintSpec::Family::power, delta};
}

ConstraintSpec ConstraintSpec::phi_power(double delta, double alpha) {
  return make_power(Kind::upper_bound_positive, delta, alpha);
}
ConstraintSpec ConstraintSpec::psi_power(double delta, double alpha) {
  return make_power(Kind::upper_bound_negative, delta, alpha);
}
ConstraintSpec ConstraintSpec::phi_log_power(double p) {
  if (!(p > 0.0)) throw std::invalid_argument("log power must be > 0");
  return ConstraintSpec{Kind::upper_bound_positive, Family::log_power, p};
}
ConstraintSpec ConstraintSpec::psi_log_power(double p) {
  if (!(p > 0.0)) throw std::invalid_argument("log power must be > 0");
  return ConstraintSpec{Kind::upper_bound_negative, Family::log_power, p};
}
ConstraintSpec ConstraintSpec::fixed(double K) {
  return ConstraintSpec{Kind::fixed_K, Family::constant, K};
}

double ConstraintSpec::default_delta(double alpha) {
  return std::min(0.3, 0.8 / alpha);
}

// ---- left-hand sides

Estimate lhs_theorem1(const walk::IncrementModel& model, double theta,
                      const ConstraintSpec& phi, uint64_t n, uint64_t replicas,
                      const McOptions& mc) {
  require_kind(phi, ConstraintSpec::Kind::upper_bound_positive, "lhs_theorem1");
  const double bound = phi.eval(n);
  return mc_mean(replicas, mc, "thm1", [&](rng::RandomStream& s) {
    walk::PathTracker t;
    for (uint64_t k = 0; k < n; ++k) t.step(model.sample(s));
    if (t.sum() > bound) return 0.0;
    return exp_tau_weight(theta, t.s_tau());
  });
}

Estimate lhs_theorem2(const walk::IncrementModel& model, double theta, double x,
                      const ConstraintSpec& psi, uint64_t n, uint64_t replicas,
                      const McOptions& mc) {
  require_kind(psi, ConstraintSpec::Kind::upper_bound_negative, "lhs_theorem2");
  if (x > 0.0) throw std::invalid_argument("lhs_theorem2: start x must be <= 0");
  const double bound = psi.eval(n);
  return mc_mean(replicas, mc, "thm2", [&](rng::RandomStream& s) {
    walk::PathTracker t(x);
    for (uint64_t k = 0; k < n; ++k) t.step(model.sample(s));
    if (t.max() >= 0.0 || t.sum() > bound) return 0.0;
    return std::exp(theta * t.sum());
  });
}

Estimate lhs_corollary_vatvat(const walk::IncrementModel& model, double theta,
                              const ConstraintSpec& psi, uint64_t n,
                              uint64_t replicas, const McOptions& mc) {
  require_kind(psi, ConstraintSpec::Kind::upper_bound_negative,
               "lhs_corollary_vatvat");
  const double bound = psi.eval(n);
  return mc_mean(replicas, mc, "vatvat", [&](rng::RandomStream& s) {
    walk::PathTracker t;
    for (uint64_t k = 0; k < n; ++k) t.step(model.sample(s));
    if (t.tau() != n || t.sum() > bound) return 0.0;
    return std::exp(theta * t.sum());
  });
}

Estimate lhs_theorem3(const walk::IncrementModel& model, double theta,
                      const ConstraintSpec& psi, uint64_t n, uint64_t replicas,
                      const McOptions& mc) {
  require_kind(psi, ConstraintSpec::Kind::upper_bound_negative, "lhs_theorem3");
  const double bound = psi.eval(n);
  return mc_mean(replicas, mc, "thm3", [&](rng::RandomStream& s) {
    walk::PathTracker t;
    for (uint64_t k = 0; k < n; ++k) t.step(model.sample(s));
    if (t.sum() > bound) return 0.0;
    return exp_tau_weight(theta, t.s_tau());
  });
}

Estimate lhs_theorem4(const walk::IncrementModel& model, double theta, double K,
                      uint64_t n, uint64_t replicas, const McOptions& mc) {
  return mc_mean(replicas, mc, "thm4", [&](rng::RandomStream& s) {
    walk::PathTracker t;
    for (uint64_t k = 0; k < n; ++k) t.step(model.sample(s));
    if (t.sum() > K) return 0.0;
    return exp_tau_weight(theta, t.s_tau());
  });
}

Estimate lhs_maxsmall(const walk::IncrementModel& model, double theta, double x,
                      uint64_t n, uint64_t replicas, const McOptions& mc) {
  if (x > 0.0) throw std::invalid_argument("lhs_maxsmall: start x must be <= 0");
  return mc_mean(replicas, mc, "maxsmall", [&](rng::RandomStream& s) {
    walk::PathTracker t(x);
    for (uint64_t k = 0; k < n; ++k) t.step(model.sample(s));
    if (t.max() >= 0.0) return 0.0;
    return std::exp(theta * t.sum());
  });
}

Estimate conditioned_prob(const walk::IncrementModel& model, uint64_t n,
                          double x_upper, uint64_t replicas,
                          const McOptions& mc) {
  if (!(x_upper > 0.0))
    throw std::invalid_argument("conditioned_prob: x_upper must be > 0");
  return mc_mean(replicas, mc, "integvw", [&](rng::RandomStream& s) {
    walk::PathTracker t;
    for (uint64_t k = 0; k < n; ++k) t.step(model.sample(s));
    return (t.min() >= 0.0 && t.sum() <= x_upper) ? 1.0 : 0.0;
  });
}

// ---- right-hand sides

RhsValue rhs_theorem1(const walk::IncrementModel& model, double theta,
                      const ConstraintSpec& phi, uint64_t n,
                      const renewal::RenewalTable& U,
                      const renewal::RenewalTable& V) {
  require_kind(phi, ConstraintSpec::Kind::upper_bound_positive, "rhs_theorem1");
  const double bn = model.scaling().b(n);
  const double g0 = model.density_at_zero();
  const auto iv = renewal::integral_against_table(V, renewal::Weight::unit(),
                                                  phi.eval(n));
  const auto iu = renewal::integral_against_table(
      U, renewal::Weight::exp_decay(theta),
      std::numeric_limits<double>::infinity());
  const double v = theta * g0 * bn * iv.value * iu.value;
  const double rel = iv.err / iv.value + iu.err / iu.value;
  return RhsValue{v, std::fabs(v) * rel};
}

RhsValue rhs_theorem2(const walk::IncrementModel& model, double theta, double x,
                      const ConstraintSpec& psi, uint64_t n,
                      const renewal::RenewalTable& U,
                      const renewal::RenewalTable& V) {
  require_kind(psi, ConstraintSpec::Kind::upper_bound_negative, "rhs_theorem2");
  if (x > 0.0) throw std::invalid_argument("rhs_theorem2: x must be <= 0");
  const double psi_n = psi.eval(n);
  const double bn = model.scaling().b(n);
  const double g0 = model.density_at_zero();  // g_{a,-b}(0) = g_{a,b}(0)
  const double vx = V.value_at(-x);
  const double u_at = U.value_at(-psi_n);
  const double v = g0 * bn * vx * u_at * std::exp(theta * psi_n) / theta;
  const double rel = V.stderr_at(-x) / vx + U.stderr_at(-psi_n) / u_at;
  return RhsValue{v, std::fabs(v) * rel};
}

RhsValue rhs_corollary_vatvat(const walk::IncrementModel& model, double theta,
                              const ConstraintSpec& psi, uint64_t n,
                              const renewal::RenewalTable& U) {
  require_kind(psi, ConstraintSpec::Kind::upper_bound_negative,
               "rhs_corollary_vatvat");
  const double psi_n = psi.eval(n);
  const double bn = model.scaling().b(n);
  const double g0 = model.density_at_zero();
  const double u_at = U.value_at(-psi_n);
  const double v = g0 * bn * u_at * std::exp(theta * psi_n) / theta;
  return RhsValue{v, std::fabs(v) * U.stderr_at(-psi_n) / u_at};
}

RhsValue rhs_theorem3(const walk::IncrementModel& model, double theta,
                      const ConstraintSpec& psi, uint64_t n,
                      const renewal::RenewalTable& U,
                      const renewal::RenewalTable& V0) {
  require_kind(psi, ConstraintSpec::Kind::upper_bound_negative, "rhs_theorem3");
  const double psi_n = psi.eval(n);
  const double bn = model.scaling().b(n);
  const double g0 = model.density_at_zero();
  const double u_at = U.value_at(-psi_n);
  const auto iv0 = renewal::integral_against_table(
      V0, renewal::Weight::exp_decay(theta),
      std::numeric_limits<double>::infinity());
  const double v = g0 * bn * u_at * std::exp(theta * psi_n) * iv0.value;
  const double rel = U.stderr_at(-psi_n) / u_at + iv0.err / iv0.value;
  return RhsValue{v, std::fabs(v) * rel};
}

namespace {

// int_0^y V(-w) dw via the table, without the public coarseness gate (the
// Stieltjes cells legitimately need tiny upper limits).
double iv_unit(const renewal::RenewalTable& V, double y) {
  if (y <= 0.0) return 0.0;
  double acc = 0.0;
  const auto& g = V.grid;
  for (size_t j = 1; j < g.size(); ++j) {
    const double a = g[j - 1];
    if (a >= y) return acc;
    const double b = std::min(g[j], y);
    const double slope = (V.values[j] - V.values[j - 1]) / (g[j] - g[j - 1]);
    const double va = V.values[j - 1] + slope * (a - g[j - 1]);
    const double vb = V.values[j - 1] + slope * (b - g[j - 1]);
    acc += 0.5 * (va + vb) * (b - a);
  }
  // beyond the grid: regular-variation closure
  const double xm = g.back();
  if (y > xm) {
    if (!V.tail.valid)
      throw renewal::table_error("V-table tail fit needed for int_0^y beyond grid");
    acc += V.tail.coef *
           (std::pow(y, V.tail.exponent + 1.0) - std::pow(xm, V.tail.exponent + 1.0)) /
           (V.tail.exponent + 1.0);
  }
  return acc;
}

}  // namespace

RhsValue rhs_theorem4(const walk::IncrementModel& model, double theta, double K,
                      const renewal::RenewalTable& U,
                      const renewal::RenewalTable& V,
                      const renewal::RenewalTable& V0) {
  const double g0 = model.density_at_zero();
  const double u_lo = std::max(-K, 0.0);
  const auto& grid = U.grid;
  if (grid.size() < 2 || grid.front() != 0.0)
    throw renewal::table_error("rhs_theorem4: U-grid must start at 0");
  for (size_t j = 1; j < grid.size(); ++j)
    if (grid[j] <= 8.0 && grid[j] - grid[j - 1] > 0.25 + 1e-12)
      throw renewal::table_error("rhs_theorem4: U-grid step must be <= 0.25 near 0");

  // First term: int e^{theta x} U(-dx) int_0^{K-x} V(-w) dw as a Stieltjes
  // sum over u = -x; the unit atom of U at 0 enters only when K >= 0.
  double term1 = 0.0;
  if (u_lo == 0.0) term1 += U.values.front() * iv_unit(V, K);
  for (size_t j = 1; j < grid.size(); ++j) {
    if (grid[j] <= u_lo) continue;
    const double a = std::max(grid[j - 1], u_lo);
    const double b = grid[j];
    const double du =
        (U.values[j] - U.values[j - 1]) * (b - a) / (grid[j] - grid[j - 1]);
    const double um = 0.5 * (a + b);
    term1 += du * std::exp(-theta * um) * iv_unit(V, K + um);
  }

  // Second term: int e^{theta x} U(-x) V0(-(K-x)) dx, x = -u.
  double term2 = 0.0, quad_err = 0.0;
  for (size_t j = 1; j < grid.size(); ++j) {
    if (grid[j] <= u_lo) continue;
    const double a = std::max(grid[j - 1], u_lo);
    const double b = grid[j];
    detail::gk15(
        [&](double u) {
          return std::exp(-theta * u) * U.value_at(u) * V0.value_at(K + u);
        },
        a, b, term2, quad_err);
  }

  // Beyond the grid both integrands carry e^{-theta u}; close with the
  // regular-variation fits when available, otherwise book the bound as
  // error (it is negligible for grids with theta*u_max >~ 25).
  const double u_max = grid.back();
  double tail_err = 0.0;
  const double tail_scale = std::exp(-theta * u_max) * U.values.back();
  if (U.tail.valid && V.tail.valid && V0.tail.valid) {
    double t1 = 0.0, t2 = 0.0, e = 0.0;
    const double span = 40.0 / theta;
    const int panels = 64;
    for (int i = 0; i < panels; ++i) {
      const double a = u_max + span * i / panels;
      const double b = u_max + span * (i + 1) / panels;
      detail::gk15(
          [&](double u) {
            const double du = U.tail.coef * U.tail.exponent *
                              std::pow(u, U.tail.exponent - 1.0);
            return std::exp(-theta * u) * du * iv_unit(V, K + u);
          },
          a, b, t1, e);
      detail::gk15(
          [&](double u) {
            return std::exp(-theta * u) * U.value_at(u) * V0.value_at(K + u);
          },
          a, b, t2, e);
    }
    term1 += t1;
    term2 += t2;
  } else {
    tail_err = tail_scale * (iv_unit(V, std::min(K + u_max, V.grid.back())) +
                             V0.values.back() / theta);
  }

  const double v = g0 * (term1 + term2);
  const double rel_tables =
      U.stderrs.back() / U.values.back() + V.stderrs.back() / V.values.back();
  return RhsValue{v, std::fabs(v) * rel_tables + g0 * (quad_err + tail_err)};
}

RhsValue rhs_maxsmall(const walk::IncrementModel& model, double theta, double x,
                      uint64_t n, const renewal::RenewalTable& U,
                      const renewal::RenewalTable& V) {
  if (x > 0.0) throw std::invalid_argument("rhs_maxsmall: x must be <= 0");
  const double bn = model.scaling().b(n);
  const double g0 = model.density_at_zero();
  const double vx = V.value_at(-x);
  const auto iu = renewal::integral_against_table(
      U, renewal::Weight::exp_decay(theta),
      std::numeric_limits<double>::infinity());
  const double v = g0 * bn * vx * iu.value;
  const double rel = V.stderr_at(-x) / vx + iu.err / iu.value;
  return RhsValue{v, std::fabs(v) * rel};
}

RhsValue rhs_integvw(const walk::IncrementModel& model, uint64_t n,
                     double x_upper, const renewal::RenewalTable& V) {
  if (!(x_upper > 0.0))
    throw std::invalid_argument("rhs_integvw: x_upper must be > 0");
  const double bn = model.scaling().b(n);
  const double g0 = model.density_at_zero();
  const auto iv =
      renewal::integral_against_table(V, renewal::Weight::unit(), x_upper);
  const double v = g0 * bn * iv.value;
  return RhsValue{v, std::fabs(v) * iv.err / iv.value};
}

// ---- ratio experiments

std::string theorem_name(TheoremId id) {
  switch (id) {
    case TheoremId::theorem1: return "theorem1";
    case TheoremId::theorem2: return "theorem2";
    case TheoremId::theorem3: return "theorem3";
    case TheoremId::theorem4: return "theorem4";
    case TheoremId::corollary_vatvat: return "corollary_vatvat";
    case TheoremId::maxsmall: return "maxsmall";
    case TheoremId::integvw: return "integvw";
  }
  return "?";
}

namespace {

Estimate run_lhs(TheoremId id, const walk::IncrementModel& model,
                 const ExperimentParams& p, uint64_t n, uint64_t replicas,
                 const McOptions& mc) {
  switch (id) {
    case TheoremId::theorem1:
      return lhs_theorem1(model, p.theta, *p.constraint, n, replicas, mc);
    case TheoremId::theorem2:
      return lhs_theorem2(model, p.theta, p.x, *p.constraint, n, replicas, mc);
    case TheoremId::theorem3:
      return lhs_theorem3(model, p.theta, *p.constraint, n, replicas, mc);
    case TheoremId::theorem4:
      return lhs_theorem4(model, p.theta, p.K, n, replicas, mc);
    case TheoremId::corollary_vatvat:
      return lhs_corollary_vatvat(model, p.theta, *p.constraint, n, replicas, mc);
    case TheoremId::maxsmall:
      return lhs_maxsmall(model, p.theta, p.x, n, replicas, mc);
    case TheoremId::integvw: {
      const double x_upper = p.constraint ? p.constraint->eval(n) : p.K;
      return conditioned_prob(model, n, x_upper, replicas, mc);
    }
  }
  throw std::logic_error("unreachable");
}

RhsValue run_rhs(TheoremId id, const walk::IncrementModel& model,
                 const ExperimentParams& p, uint64_t n, const Tables& t) {
  auto need = [&](const renewal::RenewalTable* tab, const char* which) {
    if (!tab)
      throw renewal::table_error(theorem_name(id) + " needs a " +
                                 std::string(which) + " table");
    return tab;
  };
  switch (id) {
    case TheoremId::theorem1:
      return rhs_theorem1(model, p.theta, *p.constraint, n, *need(t.U, "U"),
                          *need(t.V, "V"));
    case TheoremId::theorem2:
      return rhs_theorem2(model, p.theta, p.x, *p.constraint, n, *need(t.U, "U"),
                          *need(t.V, "V"));
    case TheoremId::theorem3:
      return rhs_theorem3(model, p.theta, *p.constraint, n, *need(t.U, "U"),
                          *need(t.V0, "V0"));
    case TheoremId::theorem4: {
      RhsValue limit = rhs_theorem4(model, p.theta, p.K, *need(t.U, "U"),
                                    *need(t.V, "V"), *need(t.V0, "V0"));
      const double bn = model.scaling().b(n);
      return RhsValue{limit.value * bn, limit.err * bn};
    }
    case TheoremId::corollary_vatvat:
      return rhs_corollary_vatvat(model, p.theta, *p.constraint, n,
                                  *need(t.U, "U"));
    case TheoremId::maxsmall:
      return rhs_maxsmall(model, p.theta, p.x, n, *need(t.U, "U"),
                          *need(t.V, "V"));
    case TheoremId::integvw: {
      const double x_upper = p.constraint ? p.constraint->eval(n) : p.K;
      return rhs_integvw(model, n, x_upper, *need(t.V, "V"));
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

RatioReport run_ratio_experiment(TheoremId id, const walk::IncrementModel& model,
                                 const ExperimentParams& params,
                                 const std::vector<uint64_t>& n_grid,
                                 const Budget& budget, const Tables& tables,
                                 const McOptions& mc) {
  if (n_grid.empty())
    throw std::invalid_argument("run_ratio_experiment: empty n grid");
  if (!std::is_sorted(n_grid.begin(), n_grid.end()))
    throw std::invalid_argument("run_ratio_experiment: n grid must increase");
  const bool needs_constraint =
      id != TheoremId::theorem4 && id != TheoremId::maxsmall;
  if (needs_constraint && !params.constraint)
    throw std::invalid_argument(theorem_name(id) + " needs a constraint spec");

  RatioReport report;
  report.theorem = id;
  report.theta = params.theta;
  report.constraint_desc =
      params.constraint ? params.constraint->describe()
                        : (id == TheoremId::theorem4
                               ? ConstraintSpec::fixed(params.K).describe()
                               : std::string("none"));
  report.seed = mc.streams.master_seed;

  for (uint64_t n : n_grid) {
    McOptions mc_n{mc.streams.sub(theorem_name(id) + "/n" + std::to_string(n)),
                   mc.exec};
    uint64_t replicas = budget.replicas;
    if (replicas == 0) {
      // Pilot sizing toward the target relative stderr.
      McOptions mc_pilot{mc_n.streams.sub("pilot"), mc.exec};
      Estimate pilot =
          run_lhs(id, model, params, n, budget.pilot_replicas, mc_pilot);
      char rep[256];
      if (pilot.value <= 0.0) {
        std::snprintf(rep, sizeof rep,
                      "pilot: n=%llu replicas=%llu hits=0; cannot size budget",
                      static_cast<unsigned long long>(n),
                      static_cast<unsigned long long>(budget.pilot_replicas));
        throw budget_refused("no pilot hits for " + theorem_name(id), rep);
      }
      const double var = pilot.stderror * pilot.stderror *
                         static_cast<double>(pilot.replicas);
      const double needed =
          var / (budget.target_rel_stderr * budget.target_rel_stderr *
                 pilot.value * pilot.value);
      std::snprintf(rep, sizeof rep,
                    "pilot: n=%llu mean=%.6g var=%.6g needed=%.3g target=%g",
                    static_cast<unsigned long long>(n), pilot.value, var,
                    needed, budget.target_rel_stderr);
      if (needed > static_cast<double>(budget.max_replicas))
        throw budget_refused("budget refusal for " + theorem_name(id), rep);
      replicas = std::max<uint64_t>(static_cast<uint64_t>(needed) + 1,
                                    budget.pilot_replicas);
    }

    McOptions mc_main{mc_n.streams.sub("main"), mc.exec};
    RatioRow row;
    row.n = n;
    row.lhs = run_lhs(id, model, params, n, replicas, mc_main);
    const RhsValue rhs = run_rhs(id, model, params, n, tables);
    if (!(rhs.value > 0.0))
      throw renewal::table_error(theorem_name(id) + ": rhs must be positive");
    row.rhs = rhs.value;
    row.rhs_err = rhs.err;
    row.ratio = row.lhs.value / rhs.value;
    const double rel_lhs =
        row.lhs.value > 0.0 ? row.lhs.stderror / row.lhs.value : 0.0;
    const double rel_rhs = rhs.err / rhs.value;
    row.ratio_stderr =
        std::fabs(row.ratio) * std::sqrt(rel_lhs * rel_lhs + rel_rhs * rel_rhs);
    report.rows.push_back(row);
  }
  return report;
}

void RatioReport::write_csv(std::ostream& os) const {
  os << "theorem,n,theta,constraint_desc,lhs,lhs_stderr,rhs,ratio,ratio_stderr,"
        "replicas,seed\n";
  char buf[512];
  for (const RatioRow& r : rows) {
    std::snprintf(buf, sizeof buf,
                  "%s,%llu,%.17g,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%llu,%llu\n",
                  theorem_name(theorem).c_str(),
                  static_cast<unsigned long long>(r.n), theta,
                  constraint_desc.c_str(), r.lhs.value, r.lhs.stderror, r.rhs,
                  r.ratio, r.ratio_stderr,
                  static_cast<unsigned long long>(r.lhs.replicas),
                  static_cast<unsigned long long>(seed));
    os << buf;
  }
}

// ---- duality

DualityCheck run_pathwise_duality(const walk::IncrementModel& model,
                                  double theta, double psi_value, uint64_t n,
                                  uint64_t replicas, const McOptions& mc) {
  struct Acc {
    MeanAcc tau_form, m_form;
    uint64_t mismatches = 0;
    double max_diff = 0.0;
    void merge(const Acc& o) {
      tau_form.merge(o.tau_form);
      m_form.merge(o.m_form);
      mismatches += o.mismatches;
      max_diff = std::max(max_diff, o.max_diff);
    }
  };
  const rng::StreamFamily fam = mc.streams.sub("duality");
  auto kernel = [&](uint64_t r, Acc& acc) {
    rng::RandomStream stream = fam.replica(r);
    std::vector<double> inc(n);
    for (uint64_t k = 0; k < n; ++k) {
      // Snap to 2^-26 units: partial sums are then exact in binary64, so
      // forward and reversed summation orders agree bit for bit.
      const double x = model.sample(stream);
      inc[k] = std::nearbyint(x * 67108864.0) / 67108864.0;
    }
    const walk::PathSummary fwd = walk::summarize_increments(inc, 0.0);
    const double tau_val = (fwd.tau() == n && fwd.s_n <= psi_value)
                               ? std::exp(theta * fwd.s_n)
                               : 0.0;
    const std::vector<double> rev = walk::reverse_path(inc);
    const walk::PathSummary bwd = walk::summarize_increments(rev, 0.0);
    const double m_val = (bwd.max_s < 0.0 && bwd.s_n <= psi_value)
                             ? std::exp(theta * bwd.s_n)
                             : 0.0;
    acc.tau_form.add(tau_val);
    acc.m_form.add(m_val);
    if ((tau_val == 0.0) != (m_val == 0.0)) ++acc.mismatches;
    acc.max_diff = std::max(acc.max_diff, std::fabs(tau_val - m_val));
  };
  Acc acc = par::replica_reduce<Acc>(replicas, kernel, mc.exec);
  DualityCheck out;
  out.replicas = replicas;
  out.mismatches = acc.mismatches;
  out.max_value_diff = acc.max_diff;
  out.tau_form = acc.tau_form.estimate(mc.streams.master_seed);
  out.m_form = acc.m_form.estimate(mc.streams.master_seed);
  return out;
}

}  // namespace walklab::functionals
