// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment orchestration. Each run writes into its output directory:
//   resolved_config.json  canonical config actually used
//   report.json           deterministic results and acceptance checks
//   metadata.json         timestamps, wall-clock timings and timing checks
//   *.csv                 traces and tables, each with a header row
//   checkpoint_*.json     trained models

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "kermod/config.hpp"

namespace kermod::experiments {

struct Criterion {
  std::string name;
  std::string comparison;  // ">=" or "<="
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

struct RunResult {
  std::string output_dir;
  nlohmann::ordered_json report;
  nlohmann::ordered_json metadata;
  std::vector<Criterion> criteria;         // deterministic, also in report.json
  std::vector<Criterion> timing_criteria;  // wall-clock based, in metadata.json
  bool passed() const;
  /// 0 when every criterion passes, 1 otherwise.
  int exit_code() const { return passed() ? 0 : 1; }
};

/// Runs the configured experiment and writes its artifacts.
RunResult run_experiment(const config::ExperimentConfig& cfg);

/// Shortest round-trip decimal text of a double ("nan", "inf", "-inf" for
/// non-finite values).
std::string format_number(double v);

}  // namespace kermod::experiments
