#pragma once

#include <cstdint>
#include <string>

#include "walklab/config.hpp"
#include "walklab/parallel.hpp"

// Experiment orchestration behind the CLI: builds whatever renewal tables a
// run needs, executes the estimators, and writes CSV outputs plus a
// `manifest.txt` (config digest, seed, version, wall time). Exit codes:
// 0 success, 1 estimator/configuration error, 2 budget refusal.

namespace walklab::experiments {

inline constexpr const char* kVersion = "walklab 1.0.0";

struct RunOptions {
  std::string out_override;  // empty: use config's `out`
  int workers = 0;           // 0 = library default; speed only
  bool serial = false;       // serial reference path
  uint64_t seed_override = 0;
  bool has_seed_override = false;
};

int run(const config::ExperimentConfig& cfg, const RunOptions& opts);

// Re-runs every reference config under `reference_dir` into a scratch
// directory and byte-compares each committed CSV. Prints one line per file;
// returns 0 iff everything matches.
int verify_reference(const std::string& reference_dir, const RunOptions& opts);

}  // namespace walklab::experiments
