// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0

#include "kermod/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kermod/errors.hpp"
#include "kermod/kernel.hpp"
#include "kermod/random.hpp"

namespace kermod::train {

namespace {

using Batch = std::span<const std::size_t>;

std::vector<int> batch_labels(const data::Dataset& d, Batch batch) {
  std::vector<int> out;
  out.reserve(batch.size());
  for (std::size_t i : batch) out.push_back(d.labels[i]);
  return out;
}

// Checks that the output width and labels fit the loss kind.
void require_loss_fits(const model::TwoModuleModel& m, const data::Dataset& d, loss::LossKind kind) {
  const std::size_t outputs = m.architecture().outputs;
  if (kind == loss::LossKind::xe) {
    if (outputs < 2) throw ConfigError("loss xe needs at least two outputs; use xe2, tanh-mse or hinge for one score");
    for (int y : d.labels)
      if (y < 0 || static_cast<std::size_t>(y) >= outputs) {
        throw ConfigError("label " + std::to_string(y) + " does not fit " + std::to_string(outputs) + " outputs");
      }
    return;
  }
  if (outputs != 1) throw ConfigError("loss " + loss::to_string(kind) + " needs a single output score");
  for (int y : d.labels)
    if (y != 0 && y != 1) throw ConfigError("binary losses need labels 0 and 1");
}

ad::Tensor loss_node(const ad::Tensor& scores, std::span<const int> labels, loss::LossKind kind) {
  if (kind == loss::LossKind::xe) return ad::softmax_cross_entropy(scores, labels);
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
  return loss::risk_objective(loss::make_loss(kind), scores, pos, neg);
}

std::size_t distinct_classes(const data::Dataset& d) {
  std::vector<int> seen(d.labels);
  std::sort(seen.begin(), seen.end());
  return static_cast<std::size_t>(std::unique(seen.begin(), seen.end()) - seen.begin());
}

}  // namespace

void TrainConfig::validate() const {
  if (schedule.empty()) throw ConfigError("train.schedule must not be empty");
  for (const Stage& s : schedule)
    if (!(s.learning_rate > 0.0)) throw ConfigError("train.schedule learning rates must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("train.momentum must lie in [0, 1)");
  if (!(clip_norm >= 0.0)) throw ConfigError("train.clip_norm must be nonnegative");
  if (trace_every == 0) throw ConfigError("train.trace_every must be positive");
  if (plateau_window == 0) throw ConfigError("train.plateau_window must be positive");
  if (!(plateau_tolerance >= 0.0)) throw ConfigError("train.plateau_tolerance must be nonnegative");
}

std::size_t TrainConfig::total_epochs() const {
  std::size_t total = 0;
  for (const Stage& s : schedule) total += s.epochs;
  return total;
}

double TrainConfig::learning_rate_at(std::size_t epoch) const {
  std::size_t end = 0;
  for (const Stage& s : schedule) {
    end += s.epochs;
    if (epoch < end) return s.learning_rate;
  }
  throw ContractError("learning_rate_at: epoch " + std::to_string(epoch) + " is past the schedule");
}

double overall_loss_from_features(const model::TwoModuleModel& m, const Matrix& features, std::span<const int> labels,
                                  loss::LossKind kind) {
  return loss_node(m.output_forward(ad::Tensor::from_matrix(features)), labels, kind).item();
}

double overall_loss(const model::TwoModuleModel& m, const data::Dataset& d, loss::LossKind kind) {
  return overall_loss_from_features(m, m.embed(d.inputs), d.labels, kind);
}

std::optional<double> proxy_value(const model::TwoModuleModel& m, const data::Dataset& d, proxy::ProxyKind kind) {
  const kernel::KernelSpec spec = m.kernel_spec();
  try {
    const Matrix k = kernel::kernel_matrix(spec, m.pre_link(d.inputs));
    return proxy::evaluate(kind, k, d.labels, spec.alpha, spec.beta).value;
  } catch (const DegenerateBatchError&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Shared epoch loop. Each stage supplies its parameters, a batch objective
// and an evaluation of the current model.

struct detail::EpochLoop {
  const data::Dataset& train;
  const data::Dataset* test;
  TrainConfig cfg;
  std::vector<ad::Tensor> params;
  std::function<ad::Tensor(Batch)> objective;
  std::function<TraceRecord()> evaluate;
  std::function<double(const TraceRecord&)> monitored;
  std::function<Matrix()> snapshot;  // empty when not recorded

  ad::SgdMomentumState state;
  Rng rng;
  std::size_t epoch = 0;
  std::size_t steps = 0;
  std::vector<double> history;
  DynamicsTrace trace;
  bool stopped = false;

  EpochLoop(const data::Dataset& tr, const data::Dataset* te, const TrainConfig& c, std::vector<ad::Tensor> p)
      : train(tr), test(te), cfg(c), params(std::move(p)), rng(c.seed) {
    cfg.validate();
    if (train.size() == 0) throw ConfigError("training set is empty");
    state = ad::SgdMomentumState::init(params, cfg.momentum, cfg.schedule.front().learning_rate);
    state.clip_norm = cfg.clip_norm;
  }

  void record_now() {
    if (!trace.records.empty() && trace.records.back().epoch == epoch) return;
    record(evaluate());
  }

  void record(TraceRecord r) {
    if (!trace.records.empty() && trace.records.back().epoch == epoch) return;
    r.epoch = epoch;
    r.resampled = trace.resampled_batches;
    trace.records.push_back(r);
    if (snapshot) trace.snapshots.push_back({epoch, snapshot(), train.labels});
  }

  // Draws a batch of the same size uniformly without replacement.
  std::vector<std::size_t> fresh_batch(std::size_t size) {
    std::vector<std::size_t> all(train.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    for (std::size_t i = 0; i < size; ++i) std::swap(all[i], all[i + rng.index(all.size() - i)]);
    all.resize(size);
    return all;
  }

  void step(Batch batch, const Hooks& hooks) {
    ad::Tensor obj;
    std::vector<std::size_t> replacement;
    for (std::size_t attempt = 0;; ++attempt) {
      try {
        obj = objective(replacement.empty() ? batch : Batch(replacement));
        break;
      } catch (const DegenerateBatchError& e) {
        if (attempt >= cfg.max_batch_retries) {
          throw DegenerateBatchError(std::string(e.what()) + " (after " + std::to_string(attempt) +
                                     " resampled batches in epoch " + std::to_string(epoch + 1) + ")");
        }
        replacement = fresh_batch(std::min(train.size(), std::max<std::size_t>(batch.size(), 2)));
        ++trace.resampled_batches;
      }
    }
    ad::zero_grads(params);
    ad::backward(obj);
    ad::sgd_step(params, state);
    ++steps;
    if (hooks.on_step) hooks.on_step(steps);
  }

  void run_epoch(const Hooks& hooks) {
    state.learning_rate = cfg.learning_rate_at(epoch);
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    const std::size_t bs = cfg.batch_size == 0 ? order.size() : cfg.batch_size;
    for (std::size_t start = 0; start < order.size(); start += bs)
      step(Batch(order).subspan(start, std::min(bs, order.size() - start)), hooks);
    ++epoch;
  }

  void advance_to(std::size_t target, const Hooks& hooks) {
    if (target > cfg.total_epochs()) {
      throw ConfigError("cannot train to epoch " + std::to_string(target) + "; the schedule has " +
                        std::to_string(cfg.total_epochs()));
    }
    if (trace.records.empty()) {
      record_now();
      history.push_back(monitored(trace.records.back()));
    }
    while (epoch < target && !stopped) {
      run_epoch(hooks);
      const bool keep = epoch % cfg.trace_every == 0 || epoch == target;
      if (keep || cfg.stop_on_plateau) {
        TraceRecord r = evaluate();
        history.push_back(monitored(r));
        if (keep) record(std::move(r));
      }
      if (cfg.stop_on_plateau && history.size() > cfg.plateau_window) {
        const double then = history[history.size() - 1 - cfg.plateau_window];
        if (then - history.back() < cfg.plateau_tolerance) {
          stopped = true;
          trace.stopped_on_plateau = true;
          record_now();  // no-op when this epoch was already kept
        }
      }
      if (hooks.on_epoch && !hooks.on_epoch(epoch)) {
        record_now();
        break;
      }
    }
    trace.epochs_run = epoch;
  }
};

namespace {

TraceRecord evaluate_model(const model::TwoModuleModel& m, const Matrix& train_features, const data::Dataset& train,
                           const data::Dataset* test, const TrainConfig& cfg, bool with_proxy) {
  TraceRecord r;
  const Matrix scores = m.scores_from_features(train_features);
  r.loss = overall_loss_from_features(m, train_features, train.labels, cfg.loss);
  r.train_accuracy = model::accuracy(m.predict_from_scores(scores), train.labels);
  if (test != nullptr && test->size() > 0) r.test_accuracy = model::accuracy(m.predict(test->inputs), test->labels);
  if (with_proxy) {
    const kernel::KernelSpec spec = m.kernel_spec();
    try {
      // Gram of unit features equals the kernel matrix.
      Matrix k(train_features.rows, train_features.rows);
      for (std::size_t i = 0; i < k.rows; ++i)
        for (std::size_t j = 0; j < k.rows; ++j) k(i, j) = dot(train_features.row(i), train_features.row(j));
      r.proxy = proxy::evaluate(cfg.proxy, k, train.labels, spec.alpha, spec.beta).value;
    } catch (const DegenerateBatchError&) {
      r.proxy.reset();
    }
  }
  return r;
}

bool proxy_available(const model::TwoModuleModel& m, proxy::ProxyKind kind) {
  if (!m.architecture().normalize_link) return false;
  const double beta = m.kernel_spec().beta;
  return !(proxy::is_negative_only(kind) && beta == 0.0);
}

std::function<Matrix()> snapshot_fn(const model::TwoModuleModel& m, const data::Dataset& train,
                                    const TrainConfig& cfg) {
  if (!cfg.snapshot_features || m.architecture().feature_dim() != 2) return {};
  return [&m, &train] { return m.embed(train.inputs); };
}

}  // namespace

InputModuleTrainer::InputModuleTrainer(model::TwoModuleModel& m, const data::Dataset& train, const TrainConfig& cfg,
                                       const data::Dataset* test) {
  const kernel::KernelSpec spec = m.kernel_spec();
  proxy::require_defined(cfg.proxy, spec.beta);
  if (distinct_classes(train) < 2) throw ConfigError("input-module training needs at least two classes");
  loop_ = std::make_unique<detail::EpochLoop>(train, test, cfg, m.input_parameters());
  const double alpha = spec.alpha, beta = spec.beta;
  const proxy::ProxyKind kind = cfg.proxy;
  const bool fits_loss = [&] {
    try {
      require_loss_fits(m, train, cfg.loss);
      return true;
    } catch (const ConfigError&) {
      return false;
    }
  }();
  loop_->objective = [&m, &train, alpha, beta, kind](Batch batch) {
    const ad::Tensor x = ad::Tensor::from_matrix(select_rows(train.inputs, batch));
    const ad::Tensor k = ad::gram(m.features(x));
    return ad::scale(proxy::objective(kind, k, batch_labels(train, batch), alpha, beta), -1.0);
  };
  const TrainConfig c = loop_->cfg;
  loop_->evaluate = [&m, &train, test, c, fits_loss] {
    const Matrix f = m.embed(train.inputs);
    if (fits_loss) return evaluate_model(m, f, train, test, c, true);
    // The output width does not match the labels; only the proxy is meaningful.
    TraceRecord r;
    const kernel::KernelSpec s = m.kernel_spec();
    try {
      r.proxy = proxy::evaluate(c.proxy, kernel::kernel_matrix(s, m.pre_link(train.inputs)), train.labels, s.alpha,
                                s.beta)
                    .value;
    } catch (const DegenerateBatchError&) {
    }
    return r;
  };
  loop_->monitored = [](const TraceRecord& r) { return r.proxy ? -*r.proxy : std::numeric_limits<double>::infinity(); };
  loop_->snapshot = snapshot_fn(m, train, cfg);
  loop_->trace.stage = "input";
}

InputModuleTrainer::~InputModuleTrainer() = default;

void InputModuleTrainer::advance_to(std::size_t epoch, const Hooks& hooks) { loop_->advance_to(epoch, hooks); }
std::size_t InputModuleTrainer::epoch() const { return loop_->epoch; }
const DynamicsTrace& InputModuleTrainer::trace() const { return loop_->trace; }

DynamicsTrace train_input_module(model::TwoModuleModel& m, const data::Dataset& train, const TrainConfig& cfg,
                                 const data::Dataset* test, const Hooks& hooks) {
  InputModuleTrainer trainer(m, train, cfg, test);
  trainer.advance_to(cfg.total_epochs(), hooks);
  return trainer.trace();
}

DynamicsTrace freeze_and_train_output(model::TwoModuleModel& m, const data::Dataset& train, const TrainConfig& cfg,
                                      const data::Dataset* test, const Hooks& hooks) {
  require_loss_fits(m, train, cfg.loss);
  // F1 is frozen, so its link features are computed once and detached.
  const Matrix features = m.embed(train.inputs);
  detail::EpochLoop loop(train, test, cfg, m.output_parameters());
  const loss::LossKind kind = cfg.loss;
  loop.objective = [&m, &features, &train, kind](Batch batch) {
    const ad::Tensor f = ad::Tensor::from_matrix(select_rows(features, batch));
    return loss_node(m.output_forward(f), batch_labels(train, batch), kind);
  };
  const bool with_proxy = proxy_available(m, cfg.proxy);
  loop.evaluate = [&] { return evaluate_model(m, features, train, test, loop.cfg, with_proxy); };
  loop.monitored = [](const TraceRecord& r) { return r.loss; };
  if (cfg.snapshot_features && m.architecture().feature_dim() == 2) loop.snapshot = [&features] { return features; };
  loop.trace.stage = "output";
  loop.advance_to(cfg.total_epochs(), hooks);
  return loop.trace;
}

DynamicsTrace train_end_to_end(model::TwoModuleModel& m, const data::Dataset& train, const TrainConfig& cfg,
                               const data::Dataset* test, const Hooks& hooks) {
  require_loss_fits(m, train, cfg.loss);
  detail::EpochLoop loop(train, test, cfg, m.parameters());
  const loss::LossKind kind = cfg.loss;
  loop.objective = [&m, &train, kind](Batch batch) {
    const ad::Tensor x = ad::Tensor::from_matrix(select_rows(train.inputs, batch));
    return loss_node(m.forward(x), batch_labels(train, batch), kind);
  };
  const bool with_proxy = proxy_available(m, cfg.proxy);
  loop.evaluate = [&] { return evaluate_model(m, m.embed(train.inputs), train, test, loop.cfg, with_proxy); };
  loop.monitored = [](const TraceRecord& r) { return r.loss; };
  loop.snapshot = snapshot_fn(m, train, cfg);
  loop.trace.stage = "end-to-end";
  loop.advance_to(cfg.total_epochs(), hooks);
  return loop.trace;
}

std::vector<LabelEfficiencyRow> label_efficiency_run(const model::TwoModuleModel& trained, const data::Dataset& train,
                                                     const data::Dataset& test, std::span<const std::size_t> budgets,
                                                     bool balanced, std::uint64_t seed, const TrainConfig& output_cfg) {
  const std::size_t classes = train.num_classes;
  std::vector<LabelEfficiencyRow> rows;
  for (std::size_t budget : budgets) {
    if (budget == 0) throw ConfigError("label budgets must be positive");
    if (balanced && budget < classes) {
      throw ConfigError("balanced label budget " + std::to_string(budget) + " is below the class count " +
                        std::to_string(classes));
    }
    std::vector<std::size_t> chosen;
    if (budget >= train.size()) {
      chosen.resize(train.size());
      std::iota(chosen.begin(), chosen.end(), std::size_t{0});
    } else {
      Rng rng(seed ^ (0x9e3779b97f4a7c15ULL * (budget + 1)));
      if (balanced) {
        std::vector<std::vector<std::size_t>> by_class(classes);
        for (std::size_t i = 0; i < train.size(); ++i) by_class[static_cast<std::size_t>(train.labels[i])].push_back(i);
        for (std::size_t c = 0; c < classes; ++c) {
          const std::size_t quota = budget / classes + (c < budget % classes ? 1 : 0);
          rng.shuffle(by_class[c]);
          const std::size_t take = std::min(quota, by_class[c].size());
          chosen.insert(chosen.end(), by_class[c].begin(), by_class[c].begin() + static_cast<std::ptrdiff_t>(take));
        }
      } else {
        std::vector<std::size_t> all(train.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        rng.shuffle(all);
        chosen.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(budget));
      }
      std::sort(chosen.begin(), chosen.end());
    }
    const data::Dataset labeled = budget >= train.size() ? train : data::subset(train, chosen);
    model::TwoModuleModel m = trained.clone();
    m.reset_output(seed);
    freeze_and_train_output(m, labeled, output_cfg);
    LabelEfficiencyRow row;
    row.budget = budget;
    row.labeled = labeled.size();
    row.train_accuracy = model::accuracy(m.predict(labeled.inputs), labeled.labels);
    const std::vector<int> predicted = m.predict(test.inputs);
    row.test_accuracy = model::accuracy(predicted, test.labels);
    row.recall = model::per_class_recall(predicted, test.labels, classes);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SweepRow> proxy_accuracy_sweep(model::TwoModuleModel& m, const data::Dataset& train,
                                           const data::Dataset& test, std::span<const std::size_t> checkpoints,
                                           const TrainConfig& input_cfg, const TrainConfig& output_cfg,
                                           std::uint64_t output_seed) {
  if (checkpoints.empty()) throw ConfigError("sweep needs at least one checkpoint");
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end())) throw ConfigError("sweep checkpoints must be nondecreasing");
  InputModuleTrainer trainer(m, train, input_cfg);
  const data::Dataset& eval = test.size() > 0 ? test : train;
  std::vector<SweepRow> rows;
  for (std::size_t c : checkpoints) {
    trainer.advance_to(c);
    model::TwoModuleModel copy = m.clone();
    copy.reset_output(output_seed);
    freeze_and_train_output(copy, train, output_cfg);
    SweepRow row;
    row.epoch = c;
    row.proxy = proxy_value(m, train, input_cfg.proxy).value_or(std::numeric_limits<double>::quiet_NaN());
    row.train_accuracy = model::accuracy(copy.predict(train.inputs), train.labels);
    row.test_accuracy = model::accuracy(copy.predict(eval.inputs), eval.labels);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace kermod::train
