#include "walklab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace walklab::config {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

const std::map<std::string, ExperimentKind>& kind_map() {
  static const std::map<std::string, ExperimentKind> m = {
      {"density", ExperimentKind::density},
      {"renewal", ExperimentKind::renewal},
      {"theorem1", ExperimentKind::theorem1},
      {"theorem2", ExperimentKind::theorem2},
      {"theorem3", ExperimentKind::theorem3},
      {"theorem4", ExperimentKind::theorem4},
      {"corollary_vatvat", ExperimentKind::corollary_vatvat},
      {"maxsmall", ExperimentKind::maxsmall},
      {"integvw", ExperimentKind::integvw},
      {"bpre_survival", ExperimentKind::bpre_survival},
      {"bpre_unconstrained", ExperimentKind::bpre_unconstrained},
      {"hplus_check", ExperimentKind::hplus_check},
  };
  return m;
}

double parse_double(const std::string& key, const std::string& v, int line) {
  try {
    size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (...) {
    throw config_error("line " + std::to_string(line) + ": field '" + key +
                       "': not a number: '" + v + "'");
  }
}

uint64_t parse_count(const std::string& key, const std::string& v, int line) {
  uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw config_error("line " + std::to_string(line) + ": field '" + key +
                       "': not a count: '" + v + "'");
  return out;
}

std::vector<uint64_t> parse_count_list(const std::string& key,
                                       const std::string& v, int line) {
  std::vector<uint64_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty())
      throw config_error("line " + std::to_string(line) + ": field '" + key +
                         "': empty list element");
    out.push_back(parse_count(key, item, line));
  }
  if (out.empty())
    throw config_error("line " + std::to_string(line) + ": field '" + key +
                       "': empty list");
  return out;
}

bool is_theorem_kind(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::theorem1:
    case ExperimentKind::theorem2:
    case ExperimentKind::theorem3:
    case ExperimentKind::theorem4:
    case ExperimentKind::corollary_vatvat:
    case ExperimentKind::maxsmall:
    case ExperimentKind::integvw:
      return true;
    default:
      return false;
  }
}

}  // namespace

std::string experiment_name(ExperimentKind k) {
  for (const auto& [name, kind] : kind_map())
    if (kind == k) return name;
  return "?";
}

std::string experiment_group(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::density: return "density";
    case ExperimentKind::renewal: return "renewal";
    case ExperimentKind::bpre_survival:
    case ExperimentKind::bpre_unconstrained:
    case ExperimentKind::hplus_check: return "bpre";
    default: return "theorem";
  }
}

walk::IncrementModel ExperimentConfig::make_model() const {
  if (model_family == "gaussian") return walk::IncrementModel::gaussian(sigma2);
  if (model_family == "exact_stable")
    return walk::IncrementModel::exact_stable(
        stable::make_stable_params(alpha, beta, c));
  if (model_family == "tail_equivalent")
    return walk::IncrementModel::tail_equivalent(
        stable::make_stable_params(alpha, beta, c), crossover);
  if (model_family == "logistic_logit")
    return walk::IncrementModel::logistic_logit();
  throw config_error("unknown model family '" + model_family + "'");
}

functionals::ConstraintSpec ExperimentConfig::make_constraint() const {
  using CS = functionals::ConstraintSpec;
  const double a = make_model().attraction().alpha;
  const bool positive_side = experiment == ExperimentKind::theorem1 ||
                             experiment == ExperimentKind::integvw;
  if (constraint_family == "power") {
    return positive_side ? CS::phi_power(delta, a) : CS::psi_power(delta, a);
  }
  if (constraint_family == "log_power") {
    return positive_side ? CS::phi_log_power(log_p) : CS::psi_log_power(log_p);
  }
  if (constraint_family == "constant") return CS::fixed(K);
  throw config_error("unknown constraint family '" + constraint_family + "'");
}

bpre::EnvironmentModel ExperimentConfig::make_environment() const {
  if (offspring == "geometric")
    return bpre::EnvironmentModel::geometric(make_model());
  if (offspring == "poisson")
    return bpre::EnvironmentModel::poisson(make_model());
  throw config_error("unknown offspring family '" + offspring + "'");
}

std::string ExperimentConfig::canonical_text() const {
  char buf[256];
  std::string s;
  auto kv = [&](const char* k, const std::string& v) {
    s += k;
    s += "=";
    s += v;
    s += "\n";
  };
  auto kvd = [&](const char* k, double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    kv(k, buf);
  };
  auto kvu = [&](const char* k, uint64_t v) {
    kv(k, std::to_string(v));
  };
  kv("experiment", experiment_name(experiment));
  kv("model", model_family);
  kvd("alpha", alpha);
  kvd("beta", beta);
  kvd("c", c);
  kvd("sigma2", sigma2);
  kvd("crossover", crossover);
  kv("constraint", constraint_family);
  kvd("delta", delta);
  kvd("log_p", log_p);
  kvd("K", K);
  kvd("theta", theta);
  kvd("x", x);
  std::string grid;
  for (uint64_t n : n_grid) grid += std::to_string(n) + ",";
  kv("n_grid", grid);
  kvu("replicas", replicas);
  kvd("target_rel_stderr", target_rel_stderr);
  kvu("pilot_replicas", pilot_replicas);
  kvu("n_max", n_max);
  kvu("table_replicas", table_replicas);
  kvu("table_n_max", table_n_max);
  kvd("grid_max", grid_max);
  kvd("grid_step", grid_step);
  kv("offspring", offspring);
  kvu("J", J);
  std::string cks;
  for (uint64_t n : checkpoints) cks += std::to_string(n) + ",";
  kv("checkpoints", cks);
  kvd("x_min", x_min);
  kvd("x_max", x_max);
  kvu("points", points);
  kvu("seed", seed);
  return s;
}

uint64_t ExperimentConfig::digest() const {
  return rng::fnv1a(canonical_text());
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::map<std::string, int> seen;  // key -> first line
  bool have_experiment = false;
  bool have_seed = false;
  bool have_ngrid = false;

  std::stringstream ss(text);
  std::string raw;
  int line = 0;
  while (std::getline(ss, raw)) {
    ++line;
    std::string s = raw;
    const auto hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw config_error("line " + std::to_string(line) +
                         ": expected 'key = value', got '" + trim(raw) + "'");
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    if (key.empty() || val.empty())
      throw config_error("line " + std::to_string(line) + ": empty key or value");
    if (auto it = seen.find(key); it != seen.end())
      throw config_error("duplicate key '" + key + "' on lines " +
                         std::to_string(it->second) + " and " +
                         std::to_string(line));
    seen[key] = line;

    if (key == "experiment") {
      const auto it = kind_map().find(val);
      if (it == kind_map().end())
        throw config_error("line " + std::to_string(line) +
                           ": unknown experiment '" + val + "'");
      cfg.experiment = it->second;
      have_experiment = true;
    } else if (key == "model") {
      if (val != "gaussian" && val != "exact_stable" &&
          val != "tail_equivalent" && val != "logistic_logit")
        throw config_error("line " + std::to_string(line) +
                           ": unknown model '" + val + "'");
      cfg.model_family = val;
    } else if (key == "alpha") cfg.alpha = parse_double(key, val, line);
    else if (key == "beta") cfg.beta = parse_double(key, val, line);
    else if (key == "c") cfg.c = parse_double(key, val, line);
    else if (key == "sigma2") cfg.sigma2 = parse_double(key, val, line);
    else if (key == "crossover") cfg.crossover = parse_double(key, val, line);
    else if (key == "constraint") {
      if (val != "power" && val != "log_power" && val != "constant")
        throw config_error("line " + std::to_string(line) +
                           ": unknown constraint family '" + val + "'");
      cfg.constraint_family = val;
    } else if (key == "delta") cfg.delta = parse_double(key, val, line);
    else if (key == "log_p") cfg.log_p = parse_double(key, val, line);
    else if (key == "K") cfg.K = parse_double(key, val, line);
    else if (key == "theta") cfg.theta = parse_double(key, val, line);
    else if (key == "x") cfg.x = parse_double(key, val, line);
    else if (key == "n_grid") {
      cfg.n_grid = parse_count_list(key, val, line);
      have_ngrid = true;
    } else if (key == "replicas") {
      cfg.replicas = val == "auto" ? 0 : parse_count(key, val, line);
    } else if (key == "target_rel_stderr")
      cfg.target_rel_stderr = parse_double(key, val, line);
    else if (key == "pilot_replicas") cfg.pilot_replicas = parse_count(key, val, line);
    else if (key == "n_max") cfg.n_max = parse_count(key, val, line);
    else if (key == "table_replicas") cfg.table_replicas = parse_count(key, val, line);
    else if (key == "table_n_max") cfg.table_n_max = parse_count(key, val, line);
    else if (key == "grid_max") cfg.grid_max = parse_double(key, val, line);
    else if (key == "grid_step") cfg.grid_step = parse_double(key, val, line);
    else if (key == "offspring") {
      if (val != "geometric" && val != "poisson")
        throw config_error("line " + std::to_string(line) +
                           ": unknown offspring family '" + val + "'");
      cfg.offspring = val;
    } else if (key == "J") cfg.J = parse_count(key, val, line);
    else if (key == "checkpoints") cfg.checkpoints = parse_count_list(key, val, line);
    else if (key == "x_min") cfg.x_min = parse_double(key, val, line);
    else if (key == "x_max") cfg.x_max = parse_double(key, val, line);
    else if (key == "points") cfg.points = parse_count(key, val, line);
    else if (key == "seed") {
      cfg.seed = parse_count(key, val, line);
      have_seed = true;
    } else if (key == "out") cfg.out = val;
    else
      throw config_error("line " + std::to_string(line) + ": unknown key '" +
                         key + "'");
  }

  if (!have_experiment) throw config_error("missing required key 'experiment'");
  if (!have_seed) throw config_error("missing required key 'seed'");

  // Cross-field validation; model and constraint construction raise their
  // own errors (admissible-set membership, delta < 1/alpha).
  cfg.make_model();
  if (is_theorem_kind(cfg.experiment)) {
    if (!have_ngrid) throw config_error("theorem experiments need 'n_grid'");
    const bool needs_constraint =
        cfg.experiment != ExperimentKind::theorem4 &&
        cfg.experiment != ExperimentKind::maxsmall;
    if (needs_constraint) {
      if (cfg.constraint_family.empty())
        throw config_error(experiment_name(cfg.experiment) +
                           " needs a 'constraint' family");
      cfg.make_constraint();
    }
  }
  if (cfg.experiment == ExperimentKind::bpre_survival ||
      cfg.experiment == ExperimentKind::bpre_unconstrained) {
    if (!have_ngrid) throw config_error("bpre experiments need 'n_grid'");
    cfg.make_environment();
    if (cfg.experiment == ExperimentKind::bpre_survival)
      for (uint64_t n : cfg.n_grid)
        if (n <= 2 * cfg.J)
          throw config_error("bpre_survival needs n > 2J for every n in n_grid");
  }
  if (cfg.experiment == ExperimentKind::hplus_check) {
    if (!have_ngrid) throw config_error("hplus_check needs 'n_grid'");
    if (cfg.checkpoints.empty())
      throw config_error("hplus_check needs 'checkpoints'");
  }
  if (cfg.x > 0.0 && (cfg.experiment == ExperimentKind::theorem2 ||
                      cfg.experiment == ExperimentKind::maxsmall))
    throw config_error("start x must be <= 0 for this experiment");
  if (!(cfg.target_rel_stderr > 0.0 && cfg.target_rel_stderr < 1.0))
    throw config_error("target_rel_stderr must lie in (0,1)");
  if (!(cfg.grid_step > 0.0 && cfg.grid_max > 4.0 * cfg.grid_step))
    throw config_error("grid_max/grid_step malformed");
  if (cfg.experiment == ExperimentKind::density && cfg.points < 2)
    throw config_error("density grid needs at least 2 points");
  if (cfg.experiment == ExperimentKind::density && !(cfg.x_min < cfg.x_max))
    throw config_error("density grid needs x_min < x_max");
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace walklab::config
