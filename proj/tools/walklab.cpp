#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "walklab/config.hpp"
#include "walklab/experiments.hpp"

// walklab: stochastic-simulation experiments for random-walk functionals
// under extreme-environment constraints and branching-process survival.
//
//   walklab density|renewal|theorem|bpre --config FILE [--out DIR]
//           [--workers N] [--seed S] [--serial]
//   walklab verify-reference --dir reference [--workers N]

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out;
  int workers = 0;
  uint64_t seed = 0;
  bool has_seed = false;
  bool serial = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "experiment config file")
      ->required();
  cmd->add_option("--out", f.out, "output directory (overrides config)");
  cmd->add_option("--workers", f.workers, "worker threads (speed only)");
  cmd->add_option("--seed", f.seed, "master seed override")
      ->each([&](const std::string&) { f.has_seed = true; });
  cmd->add_flag("--serial", f.serial, "use the serial reference engine");
}

int run_group(const std::string& group, const CommonFlags& f) {
  walklab::config::ExperimentConfig cfg;
  try {
    cfg = walklab::config::load_config_file(f.config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }
  if (walklab::config::experiment_group(cfg.experiment) != group) {
    std::cerr << "config error: experiment '"
              << walklab::config::experiment_name(cfg.experiment)
              << "' belongs to subcommand '"
              << walklab::config::experiment_group(cfg.experiment) << "', not '"
              << group << "'\n";
    return 1;
  }
  walklab::experiments::RunOptions opts;
  opts.out_override = f.out;
  opts.workers = f.workers;
  opts.serial = f.serial;
  opts.seed_override = f.seed;
  opts.has_seed_override = f.has_seed;
  return walklab::experiments::run(cfg, opts);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"walklab: random-walk functionals and branching processes in "
               "unfavorable environments"};
  app.require_subcommand(1);

  CommonFlags density_f, renewal_f, theorem_f, bpre_f;
  CLI::App* density = app.add_subcommand("density", "stable density/cdf tables");
  add_common(density, density_f);
  CLI::App* renewal = app.add_subcommand("renewal", "renewal-function tables");
  add_common(renewal, renewal_f);
  CLI::App* theorem =
      app.add_subcommand("theorem", "ratio-convergence experiments");
  add_common(theorem, theorem_f);
  CLI::App* bpre = app.add_subcommand("bpre", "branching-process experiments");
  add_common(bpre, bpre_f);

  std::string ref_dir = "reference";
  int ref_workers = 0;
  bool ref_serial = false;
  CLI::App* verify = app.add_subcommand(
      "verify-reference", "re-run committed reference configs and byte-compare");
  verify->add_option("--dir", ref_dir, "reference directory");
  verify->add_option("--workers", ref_workers, "worker threads (speed only)");
  verify->add_flag("--serial", ref_serial, "use the serial reference engine");

  CLI11_PARSE(app, argc, argv);

  if (density->parsed()) return run_group("density", density_f);
  if (renewal->parsed()) return run_group("renewal", renewal_f);
  if (theorem->parsed()) return run_group("theorem", theorem_f);
  if (bpre->parsed()) return run_group("bpre", bpre_f);
  if (verify->parsed()) {
    walklab::experiments::RunOptions opts;
    opts.workers = ref_workers;
    opts.serial = ref_serial;
    return walklab::experiments::verify_reference(ref_dir, opts);
  }
  return 1;
}
