// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0
//
// Two-stage training: F1 on a proxy objective, then F2 on the overall loss
// with F1 frozen. An end-to-end trainer on the same model serves as the
// baseline.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kermod/dataset.hpp"
#include "kermod/loss.hpp"
#include "kermod/model.hpp"
#include "kermod/optim.hpp"
#include "kermod/proxy.hpp"

namespace kermod::train {

struct Stage {
  double learning_rate = 0.1;
  std::size_t epochs = 20;
  bool operator==(const Stage&) const = default;
};

struct TrainConfig {
  std::size_t batch_size = 128;  // 0 means full batch
  std::vector<Stage> schedule = {{0.1, 20}, {0.01, 20}, {0.001, 20}};
  double momentum = 0.9;
  /// Global gradient-norm clip per step; 0 disables.
  double clip_norm = 0.0;
  std::uint64_t seed = 0;
  proxy::ProxyKind proxy = proxy::ProxyKind::cts_neo;
  /// xe for multiclass outputs; xe2, tanh-mse or hinge for a single score.
  loss::LossKind loss = loss::LossKind::xe;
  /// Epochs between trace records (the first and last epoch are always kept).
  std::size_t trace_every = 1;
  /// Stop once the monitored objective improves by less than
  /// plateau_tolerance over plateau_window epochs.
  bool stop_on_plateau = false;
  double plateau_tolerance = 1e-6;
  std::size_t plateau_window = 5;
  /// Fresh batches drawn for a batch lacking a needed pair type.
  std::size_t max_batch_retries = 10;
  /// Record 2-D link features with each trace record when d1 == 2.
  bool snapshot_features = false;

  /// Throws ConfigError for an empty schedule, a nonpositive rate,
  /// momentum outside [0, 1) or trace_every == 0.
  void validate() const;
  std::size_t total_epochs() const;
  /// Learning rate in effect during (0-based) epoch e.
  double learning_rate_at(std::size_t epoch) const;
  bool operator==(const TrainConfig&) const = default;
};

struct TraceRecord {
  std::size_t epoch = 0;  // epochs completed
  std::optional<double> proxy;  // on the training set; empty when undefined
  double loss = 0.0;            // overall loss on the training set
  double train_accuracy = 0.0;
  std::optional<double> test_accuracy;
  std::size_t resampled = 0;  // resampled batches so far
};

struct FeatureSnapshot {
  std::size_t epoch = 0;
  Matrix features;  // n x 2 link activations of the training set
  std::vector<int> labels;
};

struct DynamicsTrace {
  std::string stage;  // "input", "output" or "end-to-end"
  std::vector<TraceRecord> records;
  std::vector<FeatureSnapshot> snapshots;
  std::size_t epochs_run = 0;
  std::size_t resampled_batches = 0;
  bool stopped_on_plateau = false;
};

struct Hooks {
  /// Called after every epoch with the number of completed epochs; return
  /// false to stop.
  std::function<bool(std::size_t)> on_epoch;
  /// Called after every optimizer step.
  std::function<void(std::size_t)> on_step;
};

/// Overall loss of the model on a data set: softmax cross-entropy for
/// multiclass outputs, the binary decomposed risk (lambda = 0, label 1 as
/// I+) for a single score.
double overall_loss(const model::TwoModuleModel& m, const data::Dataset& d, loss::LossKind kind);
double overall_loss_from_features(const model::TwoModuleModel& m, const Matrix& features, std::span<const int> labels,
                                  loss::LossKind kind);

/// Proxy value of F1 on a data set, or empty when the set is degenerate.
std::optional<double> proxy_value(const model::TwoModuleModel& m, const data::Dataset& d, proxy::ProxyKind kind);

namespace detail {
struct EpochLoop;
}

/// Incremental stage-1 trainer. Advancing to epoch E in several calls gives
/// the same parameters as one call.
class InputModuleTrainer {
 public:
  /// Throws ConfigError when the proxy is undefined for the link's beta or
  /// the training set has fewer than two classes.
  InputModuleTrainer(model::TwoModuleModel& m, const data::Dataset& train, const TrainConfig& cfg,
                     const data::Dataset* test = nullptr);
  ~InputModuleTrainer();
  InputModuleTrainer(const InputModuleTrainer&) = delete;
  InputModuleTrainer& operator=(const InputModuleTrainer&) = delete;

  /// Trains until `epoch` epochs are complete (or a plateau stops it).
  void advance_to(std::size_t epoch, const Hooks& hooks = {});
  std::size_t epoch() const;
  const DynamicsTrace& trace() const;

 private:
  std::unique_ptr<detail::EpochLoop> loop_;
};

/// Stage 1: ascends the proxy (descends its negation) over F1.
DynamicsTrace train_input_module(model::TwoModuleModel& m, const data::Dataset& train, const TrainConfig& cfg,
                                 const data::Dataset* test = nullptr, const Hooks& hooks = {});

/// Stage 2: trains F2 only, on link features of the frozen F1.
DynamicsTrace freeze_and_train_output(model::TwoModuleModel& m, const data::Dataset& train, const TrainConfig& cfg,
                                      const data::Dataset* test = nullptr, const Hooks& hooks = {});

/// Joint SGD of F1 and F2 on the overall loss.
DynamicsTrace train_end_to_end(model::TwoModuleModel& m, const data::Dataset& train, const TrainConfig& cfg,
                               const data::Dataset* test = nullptr, const Hooks& hooks = {});

struct LabelEfficiencyRow {
  std::size_t budget = 0;
  std::size_t labeled = 0;  // examples actually used
  double train_accuracy = 0.0;  // on the labeled subset
  double test_accuracy = 0.0;
  std::vector<double> recall;  // per class on the test set
};

/// For each budget, retrains a fresh F2 (drawn from `seed`) on that many
/// labeled training examples, class-balanced when requested. Budgets at
/// or above the training-set size use the whole set unchanged.
std::vector<LabelEfficiencyRow> label_efficiency_run(const model::TwoModuleModel& trained, const data::Dataset& train,
                                                     const data::Dataset& test, std::span<const std::size_t> budgets,
                                                     bool balanced, std::uint64_t seed, const TrainConfig& output_cfg);

struct SweepRow {
  std::size_t epoch = 0;
  double proxy = 0.0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

/// Trains F1 through the nondecreasing checkpoint epochs; at each one a
/// fresh F2 (drawn from output_seed) is trained on a copy of the model.
std::vector<SweepRow> proxy_accuracy_sweep(model::TwoModuleModel& m, const data::Dataset& train,
                                           const data::Dataset& test, std::span<const std::size_t> checkpoints,
                                           const TrainConfig& input_cfg, const TrainConfig& output_cfg,
                                           std::uint64_t output_seed);

}  // namespace kermod::train
