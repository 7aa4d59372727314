#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "walklab/bpre.hpp"
#include "walklab/functionals.hpp"
#include "walklab/walk.hpp"

// Experiment configuration: flat `key = value` text with '#' comments, no
// nesting. Every field is validated at parse time; errors carry line
// numbers. The canonical digest ties every output row back to its config.

namespace walklab::config {

class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

enum class ExperimentKind {
  density,
  renewal,
  theorem1,
  theorem2,
  theorem3,
  theorem4,
  corollary_vatvat,
  maxsmall,
  integvw,
  bpre_survival,
  bpre_unconstrained,
  hplus_check,
};

std::string experiment_name(ExperimentKind k);

// CLI subcommand grouping: density | renewal | theorem | bpre
std::string experiment_group(ExperimentKind k);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::density;

  // model
  std::string model_family = "gaussian";
  double alpha = 2.0, beta = 0.0, c = 0.5;
  double sigma2 = 1.0;
  double crossover = 5.0;

  // constraint / functional parameters
  std::string constraint_family;  // power | log_power | constant
  double delta = 0.0;
  double log_p = 0.0;
  double K = 0.0;
  double theta = 1.0;
  double x = 0.0;

  std::vector<uint64_t> n_grid;
  uint64_t replicas = 0;  // 0 = auto budget
  double target_rel_stderr = 0.05;
  uint64_t pilot_replicas = 200000;
  uint64_t n_max = 100000;

  // renewal tables used by rhs evaluators (and the renewal experiment)
  uint64_t table_replicas = 200000;
  uint64_t table_n_max = 100000;
  double grid_max = 60.0;
  double grid_step = 0.25;

  // bpre
  std::string offspring = "geometric";  // geometric | poisson
  uint64_t J = 16;
  std::vector<uint64_t> checkpoints;

  // density grid
  double x_min = -8.0, x_max = 8.0;
  uint64_t points = 321;

  uint64_t seed = 1;
  std::string out = "out";

  // Derived objects.
  walk::IncrementModel make_model() const;
  functionals::ConstraintSpec make_constraint() const;
  bpre::EnvironmentModel make_environment() const;

  // FNV-1a over the canonicalized sorted key=value list.
  uint64_t digest() const;
  std::string canonical_text() const;
};

ExperimentConfig parse_config(const std::string& text);

ExperimentConfig load_config_file(const std::string& path);

}  // namespace walklab::config
