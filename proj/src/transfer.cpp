// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0

#include "kermod/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "kermod/errors.hpp"
#include "kermod/kernel.hpp"
#include "kermod/random.hpp"
#include "kermod/stats.hpp"

namespace kermod::transfer {

CandidateModule CandidateModule::load(const std::string& path, std::string id, std::string source_task) {
  return {std::move(id), std::move(source_task), model::TwoModuleModel::load(path)};
}

namespace {

double score_indices(const CandidateModule& c, const data::Dataset& target, std::span<const std::size_t> idx,
                     proxy::ProxyKind kind) {
  const kernel::KernelSpec spec = c.module.kernel_spec();
  const data::Dataset sub = data::subset(target, idx);
  const Matrix k = kernel::kernel_matrix(spec, c.module.pre_link(sub.inputs));
  return proxy::evaluate(kind, k, sub.labels, spec.alpha, spec.beta).value;
}

}  // namespace

double score_candidate(const CandidateModule& candidate, const data::Dataset& target, const ScoreOptions& options) {
  if (!(options.subsample_fraction > 0.0 && options.subsample_fraction <= 1.0)) {
    throw ConfigError("subsample_fraction must lie in (0, 1]");
  }
  const std::size_t n = target.size();
  if (n < 2) throw DegenerateBatchError("score_candidate: target set has fewer than two examples");
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (options.subsample_fraction == 1.0) return score_indices(candidate, target, all, options.proxy);

  const auto m = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::floor(static_cast<double>(n) * options.subsample_fraction)));
  Rng rng(options.seed);
  for (std::size_t attempt = 0;; ++attempt) {
    std::vector<std::size_t> idx = all;
    for (std::size_t i = 0; i < m; ++i) std::swap(idx[i], idx[i + rng.index(n - i)]);
    idx.resize(m);
    try {
      return score_indices(candidate, target, idx, options.proxy);
    } catch (const DegenerateBatchError& e) {
      if (attempt >= options.max_retries) {
        throw DegenerateBatchError("score_candidate '" + candidate.id + "': " + e.what() + " after " +
                                   std::to_string(attempt + 1) + " subsamples");
      }
    }
  }
}

std::vector<std::size_t> descending_ranks(std::span<const std::string> ids, std::span<const double> values) {
  if (ids.size() != values.size()) throw DimensionError("ranking: ids and values disagree in length");
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return ids[a] < ids[b];
  });
  std::vector<std::size_t> ranks(ids.size());
  for (std::size_t r = 0; r < order.size(); ++r) ranks[order[r]] = r + 1;
  return ranks;
}

TransferReport rank_candidates(std::span<const std::string> ids, std::span<const double> scores) {
  if (ids.empty()) throw ContractError("rank_candidates: no candidates");
  const auto ranks = descending_ranks(ids, scores);
  TransferReport report;
  for (std::size_t i = 0; i < ids.size(); ++i) report.candidates.push_back({ids[i], "", scores[i], ranks[i], {}, {}});
  return report;
}

TransferReport rank_candidates(std::span<const CandidateModule> candidates, std::span<const double> scores) {
  std::vector<std::string> ids;
  for (const auto& c : candidates) ids.push_back(c.id);
  TransferReport report = rank_candidates(ids, scores);
  for (std::size_t i = 0; i < candidates.size(); ++i) report.candidates[i].source_task = candidates[i].source_task;
  return report;
}

void attach_oracle(TransferReport& report, std::span<const double> oracle_accuracies) {
  if (oracle_accuracies.size() != report.candidates.size()) {
    throw DimensionError("attach_oracle: one accuracy per candidate expected");
  }
  std::vector<std::string> ids;
  std::vector<double> scores;
  for (const auto& c : report.candidates) {
    ids.push_back(c.id);
    scores.push_back(c.score);
  }
  const auto ranks = descending_ranks(ids, oracle_accuracies);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    report.candidates[i].oracle_accuracy = oracle_accuracies[i];
    report.candidates[i].oracle_rank = ranks[i];
  }
  if (ids.size() >= 3) report.rank_correlation = stats::spearman(scores, oracle_accuracies);
}

double retrain_oracle(const CandidateModule& candidate, const data::Dataset& train, const data::Dataset& test,
                      const train::TrainConfig& cfg, std::uint64_t seed) {
  model::TwoModuleModel m = candidate.module.clone();
  m.reset_output(seed);
  train::freeze_and_train_output(m, train, cfg);
  return model::accuracy(m.predict(test.inputs), test.labels);
}

double rank_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("rank_correlation: rankings differ in length");
  if (a.size() < 3) throw ContractError("rank_correlation: needs at least three items");
  return stats::spearman(a, b);
}

std::vector<PolarPoint> polar_layout(const TransferReport& report) {
  const std::size_t n = report.candidates.size();
  double lo = 0.0, hi = 0.0;
  if (n > 0) {
    const auto [mn, mx] = std::minmax_element(report.candidates.begin(), report.candidates.end(),
                                              [](const auto& a, const auto& b) { return a.score < b.score; });
    lo = mn->score;
    hi = mx->score;
  }
  std::vector<PolarPoint> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = report.candidates[i];
    const double normalized = hi > lo ? (c.score - lo) / (hi - lo) : 1.0;
    out.push_back({c.source_task.empty() ? c.id : c.source_task,
                   2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n), 1.0 - normalized});
  }
  return out;
}

}  // namespace kermod::transfer
