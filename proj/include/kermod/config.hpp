// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration: a JSON document with nested sections. Loading
// fills defaults, rejects unknown keys and validates every field; dumping
// writes the canonical, fully resolved form.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kermod/dataset.hpp"
#include "kermod/geometry.hpp"
#include "kermod/model.hpp"
#include "kermod/trainer.hpp"

namespace kermod::config {

enum class ExperimentKind {
  sanity_dynamics,
  proxy_sweep,
  modular_vs_e2e,
  label_efficiency,
  transferability,
  lemma_suite,
  theorem_oracle,
};

/// Accepts sanity-dynamics, proxy-sweep, modular-vs-e2e, label-efficiency,
/// transferability, lemma-suite and theorem-oracle.
ExperimentKind parse_experiment_kind(std::string_view name);
std::string to_string(ExperimentKind kind);

struct SweepSection {
  std::vector<std::size_t> checkpoints = {0, 1, 2, 3, 4, 6, 8, 12, 16, 24};
  std::uint64_t output_seed = 11;
  bool operator==(const SweepSection&) const = default;
};

struct LabelEfficiencySection {
  std::vector<std::size_t> budgets = {4, 8, 16, 32};
  bool balanced = true;
  std::uint64_t seed = 5;
  bool operator==(const LabelEfficiencySection&) const = default;
};

struct TransferSection {
  /// Binary tasks as class pairs of the dataset; the first class of each
  /// pair becomes label 0.
  std::vector<std::array<int, 2>> tasks;
  proxy::ProxyKind proxy = proxy::ProxyKind::al;
  double subsample_fraction = 0.1;
  std::uint64_t seed = 13;
  std::uint64_t oracle_seed = 17;
  bool operator==(const TransferSection&) const = default;
};

struct LemmaSection {
  std::size_t count = 10000;
  std::uint64_t seed = 1;
  std::size_t d_min = 2;
  std::size_t d_max = 8;
  bool operator==(const LemmaSection&) const = default;
};

struct TheoremInstanceSpec {
  std::string name;
  std::vector<bool> positive;
  std::vector<std::vector<double>> grid;
  Activation nonlinearity = Activation::tanh;
  bool normalize = true;
  loss::LossKind loss = loss::LossKind::hinge;
  double lambda = 0.0;
  double weight_bound = 2.0;
  std::size_t weight_steps = 9;
  bool operator==(const TheoremInstanceSpec&) const = default;

  geometry::TheoremInstance build() const;
};

struct TheoremSection {
  std::vector<TheoremInstanceSpec> instances;
  bool exhaustive = false;
  bool operator==(const TheoremSection&) const = default;
};

/// Thresholds checked by run_experiment; unset ones are not checked.
struct AcceptanceSection {
  std::optional<double> min_train_accuracy;
  std::optional<double> max_accuracy_gap;
  std::optional<double> min_final_proxy;
  std::optional<double> min_spearman;
  std::optional<double> min_relative_accuracy;
  std::optional<double> min_rank_correlation;
  std::optional<double> max_cost_ratio;
  std::optional<std::size_t> max_failures;
  std::optional<std::size_t> max_counterexamples;
  bool operator==(const AcceptanceSection&) const = default;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::lemma_suite;
  data::DatasetSpec dataset;
  model::Architecture architecture;
  std::uint64_t model_seed = 1;
  train::TrainConfig train;         // input module (or end-to-end)
  train::TrainConfig output_train;  // output module
  std::string output_dir;           // default: runs/<experiment>
  std::optional<SweepSection> sweep;
  std::optional<LabelEfficiencySection> label_efficiency;
  std::optional<TransferSection> transfer;
  std::optional<LemmaSection> lemma;
  std::optional<TheoremSection> theorem;
  AcceptanceSection acceptance;
};

bool operator==(const data::DatasetSpec& a, const data::DatasetSpec& b);

/// Validates and resolves a parsed document. Throws ConfigError naming the
/// offending field (for example "train.schedule[1].learning_rate").
ExperimentConfig from_json(const nlohmann::json& doc);
/// Parses text; syntax errors report line and column.
ExperimentConfig parse(std::string_view text);
ExperimentConfig load(const std::string& path);

nlohmann::ordered_json to_json(const ExperimentConfig& cfg);
/// Canonical text: to_json(cfg) with two-space indentation and a final newline.
std::string dump(const ExperimentConfig& cfg);

/// Output directory with KERMOD_OUTPUT_ROOT (when set) prefixed to a
/// relative path.
std::string resolve_output_dir(const ExperimentConfig& cfg);

}  // namespace kermod::config
