#include "walklab/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "walklab/bpre.hpp"
#include "walklab/functionals.hpp"
#include "walklab/renewal.hpp"
#include "walklab/stable.hpp"

namespace walklab::experiments {

namespace fs = std::filesystem;
using config::ExperimentConfig;
using config::ExperimentKind;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

std::vector<double> table_grid(const ExperimentConfig& cfg, bool negative) {
  const auto m = static_cast<int64_t>(std::llround(cfg.grid_max / cfg.grid_step));
  std::vector<double> g;
  g.reserve(m + 1);
  for (int64_t i = 0; i <= m; ++i)
    g.push_back((negative ? -1.0 : 1.0) * static_cast<double>(i) * cfg.grid_step);
  return g;
}

struct BuiltTables {
  std::optional<renewal::RenewalTable> U, V, V0;

  functionals::Tables view() const {
    return functionals::Tables{U ? &*U : nullptr, V ? &*V : nullptr,
                               V0 ? &*V0 : nullptr};
  }
};

BuiltTables build_tables(const ExperimentConfig& cfg, uint64_t seed,
                         const par::ExecPolicy& exec, bool need_u, bool need_v,
                         bool need_v0) {
  const walk::IncrementModel model = cfg.make_model();
  const rng::StreamFamily fam = rng::StreamFamily::make(seed, "tables");
  BuiltTables t;
  if (need_u)
    t.U = renewal::estimate_U(model, table_grid(cfg, false), cfg.table_replicas,
                              cfg.table_n_max, fam.sub("U"), exec);
  if (need_v)
    t.V = renewal::estimate_V(model, table_grid(cfg, true), cfg.table_replicas,
                              cfg.table_n_max, fam.sub("V"), exec);
  if (need_v0)
    t.V0 = renewal::estimate_V0(model, table_grid(cfg, true), cfg.table_replicas,
                                cfg.table_n_max, fam.sub("V0"), exec);
  return t;
}

void write_tables_csv(const fs::path& dir, const BuiltTables& t) {
  if (!t.U && !t.V && !t.V0) return;
  std::ofstream os = open_out(dir / "renewal.csv");
  bool first = true;
  for (const auto* tab : {t.U ? &*t.U : nullptr, t.V ? &*t.V : nullptr,
                          t.V0 ? &*t.V0 : nullptr}) {
    if (!tab) continue;
    if (first) {
      tab->write_csv(os);
      first = false;
    } else {
      std::ostringstream tmp;
      tab->write_csv(tmp);
      const std::string s = tmp.str();
      os << s.substr(s.find('\n') + 1);  // drop the repeated header
    }
  }
}

functionals::TheoremId theorem_id_of(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::theorem1: return functionals::TheoremId::theorem1;
    case ExperimentKind::theorem2: return functionals::TheoremId::theorem2;
    case ExperimentKind::theorem3: return functionals::TheoremId::theorem3;
    case ExperimentKind::theorem4: return functionals::TheoremId::theorem4;
    case ExperimentKind::corollary_vatvat:
      return functionals::TheoremId::corollary_vatvat;
    case ExperimentKind::maxsmall: return functionals::TheoremId::maxsmall;
    case ExperimentKind::integvw: return functionals::TheoremId::integvw;
    default: throw std::logic_error("not a theorem experiment");
  }
}

void run_density(const ExperimentConfig& cfg, uint64_t seed, const fs::path& out,
                 std::map<std::string, std::string>& manifest) {
  const auto params = stable::make_stable_params(
      cfg.model_family == "gaussian"
          ? 2.0
          : (cfg.model_family == "logistic_logit" ? 2.0 : cfg.alpha),
      cfg.model_family == "exact_stable" || cfg.model_family == "tail_equivalent"
          ? cfg.beta
          : 0.0,
      cfg.model_family == "gaussian"
          ? cfg.sigma2 / 2.0
          : (cfg.model_family == "logistic_logit" ? 1.6449340668482264
                                                  : cfg.c));
  std::ofstream os = open_out(out / "density.csv");
  os << "x,pdf,pdf_err,cdf\n";
  for (uint64_t i = 0; i < cfg.points; ++i) {
    const double x =
        cfg.x_min + (cfg.x_max - cfg.x_min) * static_cast<double>(i) /
                        static_cast<double>(cfg.points - 1);
    const auto d = stable::density_checked(params, x);
    os << fmt(x) << ',' << fmt(d.value) << ',' << fmt(d.abs_error) << ','
       << fmt(stable::cdf(params, x)) << '\n';
  }
  manifest["density_at_zero"] = fmt(stable::density_at_zero(params));
  manifest["positivity_rho"] = fmt(stable::positivity_rho(params));
  (void)seed;
}

void run_theorem(const ExperimentConfig& cfg, uint64_t seed, const fs::path& out,
                 const par::ExecPolicy& exec,
                 std::map<std::string, std::string>& manifest) {
  const auto id = theorem_id_of(cfg.experiment);
  const walk::IncrementModel model = cfg.make_model();

  bool need_u = true, need_v = false, need_v0 = false;
  switch (id) {
    case functionals::TheoremId::theorem1:
    case functionals::TheoremId::theorem2:
    case functionals::TheoremId::maxsmall: need_v = true; break;
    case functionals::TheoremId::theorem3: need_v0 = true; break;
    case functionals::TheoremId::theorem4: need_v = need_v0 = true; break;
    case functionals::TheoremId::corollary_vatvat: break;
    case functionals::TheoremId::integvw:
      need_u = false;
      need_v = true;
      break;
  }
  const BuiltTables tables = build_tables(cfg, seed, exec, need_u, need_v, need_v0);
  write_tables_csv(out, tables);

  functionals::ExperimentParams params;
  params.theta = cfg.theta;
  params.x = cfg.x;
  params.K = cfg.K;
  const bool needs_constraint = id != functionals::TheoremId::theorem4 &&
                                id != functionals::TheoremId::maxsmall;
  if (needs_constraint) params.constraint = cfg.make_constraint();

  functionals::Budget budget;
  budget.replicas = cfg.replicas;
  budget.target_rel_stderr = cfg.target_rel_stderr;
  budget.pilot_replicas = cfg.pilot_replicas;

  functionals::McOptions mc{
      rng::StreamFamily::make(seed, config::experiment_name(cfg.experiment)),
      exec};
  const auto report = functionals::run_ratio_experiment(
      id, model, params, cfg.n_grid, budget, tables.view(), mc);
  std::ofstream os = open_out(out / "theorem.csv");
  report.write_csv(os);
  manifest["model"] = model.name();
  manifest["density_at_zero"] = fmt(model.density_at_zero());
  manifest["rho"] = fmt(model.rho());
}

void run_renewal(const ExperimentConfig& cfg, uint64_t seed, const fs::path& out,
                 const par::ExecPolicy& exec,
                 std::map<std::string, std::string>& manifest) {
  const BuiltTables tables = build_tables(cfg, seed, exec, true, true, true);
  write_tables_csv(out, tables);
  manifest["model"] = cfg.make_model().name();
  manifest["censor_frac_U"] = fmt(tables.U->censor_frac);
}

void run_bpre_survival(const ExperimentConfig& cfg, uint64_t seed,
                       const fs::path& out, const par::ExecPolicy& exec,
                       std::map<std::string, std::string>& manifest) {
  const bpre::EnvironmentModel env = cfg.make_environment();
  bpre::SurvivalReport report;
  for (uint64_t n : cfg.n_grid) {
    bpre::McOptions mc{
        rng::StreamFamily::make(seed, "bpre_survival/n" + std::to_string(n)),
        exec};
    report.rows.push_back(
        bpre::survival_constrained(env, n, cfg.K, cfg.replicas, cfg.J, mc));
  }
  std::ofstream os = open_out(out / "bpre_survival.csv");
  report.write_csv(os);
  bpre::McOptions mc{rng::StreamFamily::make(seed, "bpre_b2"), exec};
  manifest["b2_diagnostic_b1_eps0.5"] =
      fmt(bpre::b2_diagnostic(env, 1, 0.5, std::min<uint64_t>(cfg.replicas, 200000), mc)
              .value);
  manifest["model"] = env.driver.name();
}

void run_bpre_unconstrained(const ExperimentConfig& cfg, uint64_t seed,
                            const fs::path& out, const par::ExecPolicy& exec,
                            std::map<std::string, std::string>& manifest) {
  const bpre::EnvironmentModel env = cfg.make_environment();
  std::ofstream os = open_out(out / "bpre_unconstrained.csv");
  os << "n,survival,stderr,nonpos_frac,nonpos_stderr,replicas,seed\n";
  for (uint64_t n : cfg.n_grid) {
    bpre::McOptions mc{
        rng::StreamFamily::make(seed, "bpre_u/n" + std::to_string(n)), exec};
    const Estimate s = bpre::survival_unconstrained(env, n, cfg.replicas, mc);
    const Estimate f =
        bpre::conditional_nonpositive_fraction(env, n, cfg.replicas, mc);
    os << n << ',' << fmt(s.value) << ',' << fmt(s.stderror) << ','
       << fmt(f.value) << ',' << fmt(f.stderror) << ',' << cfg.replicas << ','
       << seed << '\n';
  }
  manifest["model"] = env.driver.name();
}

void run_hplus(const ExperimentConfig& cfg, uint64_t seed, const fs::path& out,
               const par::ExecPolicy& exec,
               std::map<std::string, std::string>& manifest) {
  const walk::IncrementModel model = cfg.make_model();
  const bpre::EnvironmentModel env = cfg.make_environment();
  const BuiltTables tables = build_tables(cfg, seed, exec, true, true, false);
  write_tables_csv(out, tables);
  const double xp = std::fabs(cfg.x), xm = -std::fabs(cfg.x);

  std::ofstream os = open_out(out / "hplus.csv");
  os << "check,n,value,stderr,replicas,seed\n";
  auto row = [&](const std::string& check, uint64_t n, const Estimate& e) {
    os << check << ',' << n << ',' << fmt(e.value) << ',' << fmt(e.stderror)
       << ',' << e.replicas << ',' << seed << '\n';
  };
  const bpre::PathFunctional one = [](const bpre::PathContext&) { return 1.0; };
  for (uint64_t n : cfg.n_grid) {
    bpre::McOptions mc{
        rng::StreamFamily::make(seed, "hplus/n" + std::to_string(n)), exec};
    row("plus_unit", n,
        bpre::plus_measure_expectation(model, one, xp, n, cfg.replicas,
                                       *tables.U, mc));
    row("minus_unit", n,
        bpre::minus_measure_expectation(model, one, xm, n, cfg.replicas,
                                        *tables.V, mc));
  }
  bpre::McOptions mc{rng::StreamFamily::make(seed, "hplus/W"), exec};
  const auto track = bpre::martingale_W_track(env, xp, cfg.checkpoints,
                                              cfg.replicas, *tables.U, mc);
  for (size_t i = 0; i < track.checkpoints.size(); ++i)
    row("martingale_W", track.checkpoints[i], track.w_mean[i]);
  row("W_positive_frac", track.checkpoints.back(),
      track.positive_fraction_last);
  manifest["model"] = model.name();
}

}  // namespace

int run(const ExperimentConfig& cfg, const RunOptions& opts) {
  const uint64_t seed = opts.has_seed_override ? opts.seed_override : cfg.seed;
  const fs::path out = opts.out_override.empty() ? fs::path(cfg.out)
                                                 : fs::path(opts.out_override);

  // Probe writability before any computation.
  try {
    fs::create_directories(out);
    const fs::path probe = out / ".write_probe";
    {
      std::ofstream p(probe);
      if (!p) throw std::runtime_error("probe open failed");
      p << "ok";
    }
    fs::remove(probe);
  } catch (const std::exception& e) {
    std::cerr << "error: output directory not writable: " << out.string()
              << " (" << e.what() << ")\n";
    return 1;
  }

  par::ExecPolicy exec{!opts.serial, opts.workers};
  std::map<std::string, std::string> manifest;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    switch (cfg.experiment) {
      case ExperimentKind::density:
        run_density(cfg, seed, out, manifest);
        break;
      case ExperimentKind::renewal:
        run_renewal(cfg, seed, out, exec, manifest);
        break;
      case ExperimentKind::bpre_survival:
        run_bpre_survival(cfg, seed, out, exec, manifest);
        break;
      case ExperimentKind::bpre_unconstrained:
        run_bpre_unconstrained(cfg, seed, out, exec, manifest);
        break;
      case ExperimentKind::hplus_check:
        run_hplus(cfg, seed, out, exec, manifest);
        break;
      default:
        run_theorem(cfg, seed, out, exec, manifest);
        break;
    }
  } catch (const functionals::budget_refused& e) {
    std::cerr << "budget refused: " << e.what() << "\n" << e.report << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  char digest[32];
  std::snprintf(digest, sizeof digest, "%016llx",
                static_cast<unsigned long long>(cfg.digest()));
  std::ofstream mf = open_out(out / "manifest.txt");
  mf << "version = " << kVersion << "\n";
  mf << "experiment = " << config::experiment_name(cfg.experiment) << "\n";
  mf << "config_digest = " << digest << "\n";
  mf << "seed = " << seed << "\n";
  for (const auto& [k, v] : manifest) mf << k << " = " << v << "\n";
  mf << "wall_time_s = " << fmt(wall) << "\n";
  return 0;
}

int verify_reference(const std::string& reference_dir, const RunOptions& opts) {
  const fs::path ref(reference_dir);
  if (!fs::is_directory(ref)) {
    std::cerr << "error: no reference directory at " << ref.string() << "\n";
    return 1;
  }
  std::vector<fs::path> configs;
  for (const auto& e : fs::directory_iterator(ref))
    if (e.path().extension() == ".cfg") configs.push_back(e.path());
  std::sort(configs.begin(), configs.end());
  if (configs.empty()) {
    std::cerr << "error: no .cfg files under " << ref.string() << "\n";
    return 1;
  }

  int failures = 0;
  for (const fs::path& cfg_path : configs) {
    const std::string name = cfg_path.stem().string();
    config::ExperimentConfig cfg;
    try {
      cfg = config::load_config_file(cfg_path.string());
    } catch (const std::exception& e) {
      std::cout << name << ": FAIL (config: " << e.what() << ")\n";
      ++failures;
      continue;
    }
    const fs::path scratch =
        fs::temp_directory_path() / ("walklab_verify_" + name);
    fs::remove_all(scratch);
    RunOptions ro = opts;
    ro.out_override = scratch.string();
    if (run(cfg, ro) != 0) {
      std::cout << name << ": FAIL (run errored)\n";
      ++failures;
      continue;
    }
    const fs::path committed = ref / name;
    bool any = false, ok = true;
    if (fs::is_directory(committed)) {
      for (const auto& e : fs::directory_iterator(committed)) {
        if (e.path().extension() != ".csv") continue;
        any = true;
        std::ifstream a(e.path(), std::ios::binary);
        std::ifstream b(scratch / e.path().filename(), std::ios::binary);
        std::stringstream sa, sb;
        sa << a.rdbuf();
        sb << b.rdbuf();
        const bool match = b.good() && sa.str() == sb.str();
        std::cout << name << "/" << e.path().filename().string() << ": "
                  << (match ? "PASS" : "FAIL") << "\n";
        if (!match) ok = false;
      }
    }
    if (!any) {
      std::cout << name << ": FAIL (no committed CSVs)\n";
      ok = false;
    }
    if (!ok) ++failures;
    fs::remove_all(scratch);
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace walklab::experiments
