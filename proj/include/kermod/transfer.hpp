// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0
//
// Training-free reusability estimate for frozen input modules: a candidate
// scores higher on a target task when its features reach a higher proxy
// value on (a subsample of) the target data.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kermod/dataset.hpp"
#include "kermod/model.hpp"
#include "kermod/proxy.hpp"
#include "kermod/trainer.hpp"

namespace kermod::transfer {

struct CandidateModule {
  std::string id;
  std::string source_task;
  model::TwoModuleModel module;  // only F1 and the link are used for scoring

  static CandidateModule load(const std::string& path, std::string id, std::string source_task);
};

struct ScoreOptions {
  proxy::ProxyKind proxy = proxy::ProxyKind::al;
  double subsample_fraction = 0.1;
  std::uint64_t seed = 0;
  std::size_t max_retries = 10;
};

/// Proxy value of the frozen module's kernel matrix on a seeded subsample of
/// floor(n * fraction) target examples (at least 2). A fraction of 1 uses
/// the whole set in its original order. A subsample lacking a needed pair
/// type is redrawn up to max_retries times before DegenerateBatchError.
double score_candidate(const CandidateModule& candidate, const data::Dataset& target, const ScoreOptions& options);

struct CandidateResult {
  std::string id;
  std::string source_task;
  double score = 0.0;
  std::size_t rank = 0;  // 1 = most transferable
  std::optional<double> oracle_accuracy;
  std::optional<std::size_t> oracle_rank;
};

struct TransferReport {
  std::string target_task;
  std::vector<CandidateResult> candidates;  // input order
  /// Spearman correlation between proxy scores and oracle accuracies
  /// (average ranks for ties); present once oracle values are attached.
  std::optional<double> rank_correlation;
};

/// Ranks by descending value; equal values are ordered by id.
std::vector<std::size_t> descending_ranks(std::span<const std::string> ids, std::span<const double> values);

/// Ranks candidates by descending score.
TransferReport rank_candidates(std::span<const std::string> ids, std::span<const double> scores);
TransferReport rank_candidates(std::span<const CandidateModule> candidates, std::span<const double> scores);

/// Fills oracle accuracies, their ranks and the rank correlation.
void attach_oracle(TransferReport& report, std::span<const double> oracle_accuracies);

/// Accuracy on `test` of a fresh output module (drawn from `seed`) trained
/// on `train` above the frozen candidate.
double retrain_oracle(const CandidateModule& candidate, const data::Dataset& train, const data::Dataset& test,
                      const train::TrainConfig& cfg, std::uint64_t seed);

/// Spearman correlation of two rankings of at least three items.
double rank_correlation(std::span<const double> a, std::span<const double> b);

struct PolarPoint {
  std::string task;
  double angle = 0.0;   // radians, 2 pi i / #tasks in the given order
  double radius = 0.0;  // 1 - (score - min) / (max - min); 0 = most transferable
};

/// Polar layout of one report: one angle per candidate in report order.
std::vector<PolarPoint> polar_layout(const TransferReport& report);

}  // namespace kermod::transfer
