#pragma once

#include <string>
#include <vector>

#include "dmo/config.hpp"

namespace dmo {

struct RunOptions {
  std::string output_dir; // overrides the config key when non-empty
  long threads = -1;      // -1: take from config
  long long seed = -1;    // -1: take from config
  bool check = false;     // evaluate per-experiment sanity assertions
};

struct RunResult {
  bool check_ok = true;
  std::vector<std::string> failures;
  std::vector<std::string> outputs;
};

// Runs the experiment named by cfg["experiment"], writing per-experiment
// CSVs plus a manifest.json into the output directory.  All validation
// happens before any file is created; CSV bodies are deterministic functions
// of (config, seed) and every row carries the config hash.
RunResult run_experiment(const Config& cfg, const RunOptions& opts);

// Catalog of experiments, fields, data generators, and moduli with their
// parameter schemas, one `key: type: default` line per parameter.
std::string list_catalog();

} // namespace dmo
