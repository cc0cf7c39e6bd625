// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0

#include "kermod/experiments.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "kermod/errors.hpp"
#include "kermod/geometry.hpp"
#include "kermod/stats.hpp"
#include "kermod/transfer.hpp"

namespace kermod::experiments {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

void write_json(const fs::path& path, const ordered_json& j) { write_text(path, j.dump(2) + "\n"); }

std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

class Csv {
 public:
  Csv(fs::path path, std::vector<std::string> header) : path_(std::move(path)), width_(header.size()) { add(header); }
  void add(const std::vector<std::string>& row) {
    if (row.size() != width_) throw InternalInvariantError("csv row width mismatch in " + path_.string());
    for (std::size_t i = 0; i < row.size(); ++i) text_ << (i ? "," : "") << row[i];
    text_ << '\n';
  }
  ~Csv() noexcept(false) { write_text(path_, text_.str()); }

 private:
  fs::path path_;
  std::size_t width_;
  std::ostringstream text_;
};

Criterion at_least(std::string name, double value, double threshold) {
  return {std::move(name), ">=", value, threshold, value >= threshold};
}
Criterion at_most(std::string name, double value, double threshold) {
  return {std::move(name), "<=", value, threshold, value <= threshold};
}

ordered_json criterion_json(const Criterion& c) {
  return {{"name", c.name}, {"comparison", c.comparison}, {"value", c.value}, {"threshold", c.threshold},
          {"passed", c.passed}};
}

ordered_json trace_json(const train::DynamicsTrace& t) {
  ordered_json j;
  j["stage"] = t.stage;
  j["epochs_run"] = t.epochs_run;
  j["resampled_batches"] = t.resampled_batches;
  j["stopped_on_plateau"] = t.stopped_on_plateau;
  if (!t.records.empty()) {
    const auto& r = t.records.back();
    j["final"] = {{"epoch", r.epoch},
                  {"proxy", r.proxy ? ordered_json(*r.proxy) : ordered_json(nullptr)},
                  {"loss", r.loss},
                  {"train_accuracy", r.train_accuracy},
                  {"test_accuracy", r.test_accuracy ? ordered_json(*r.test_accuracy) : ordered_json(nullptr)}};
  }
  return j;
}

void write_trace_csv(const fs::path& path, const train::DynamicsTrace& t) {
  Csv csv(path, {"stage", "epoch", "proxy", "loss", "train_accuracy", "test_accuracy", "resampled"});
  for (const auto& r : t.records) {
    csv.add({t.stage, std::to_string(r.epoch), cell(r.proxy), format_number(r.loss), format_number(r.train_accuracy),
             cell(r.test_accuracy), std::to_string(r.resampled)});
  }
}

void write_snapshot_csv(const fs::path& path, const train::DynamicsTrace& t) {
  Csv csv(path, {"stage", "epoch", "index", "label", "x", "y"});
  for (const auto& s : t.snapshots)
    for (std::size_t i = 0; i < s.features.rows; ++i) {
      csv.add({t.stage, std::to_string(s.epoch), std::to_string(i), std::to_string(s.labels[i]),
               format_number(s.features(i, 0)), format_number(s.features(i, 1))});
    }
}

struct Context {
  const config::ExperimentConfig& cfg;
  fs::path dir;
  RunResult& result;
  ordered_json timings = ordered_json::object();
};

// ---------------------------------------------------------------------------

void run_lemma(Context& ctx) {
  const auto& s = *ctx.cfg.lemma;
  const auto t0 = Clock::now();
  const geometry::LemmaSuiteReport rep = geometry::run_lemma_suite(s.count, s.seed, s.d_min, s.d_max);
  ctx.timings["lemma_suite"] = seconds_since(t0);
  ctx.result.report["results"] = {{"instances", rep.instances},
                                  {"failures", rep.failures},
                                  {"seed", rep.seed},
                                  {"d_min", rep.d_min},
                                  {"d_max", rep.d_max},
                                  {"max_unit_norm_error", rep.max_unit_norm_error},
                                  {"max_n_equality_error", rep.max_n_equality_error},
                                  {"max_p_shortfall", rep.max_p_shortfall},
                                  {"max_unit_constraint_error", rep.max_unit_constraint_error},
                                  {"max_angle_gap_excess", rep.max_angle_gap_excess},
                                  {"mirrored_instances", rep.mirrored},
                                  {"failing_instances", rep.failing_instances}};
  ctx.result.criteria.push_back(at_most("lemma_failures", static_cast<double>(rep.failures),
                                        static_cast<double>(ctx.cfg.acceptance.max_failures.value_or(0))));
}

void run_theorem(Context& ctx) {
  const auto& s = *ctx.cfg.theorem;
  ordered_json instances = ordered_json::array();
  std::size_t total = 0;
  Csv csv(ctx.dir / "theorem.csv",
          {"instance", "assignments", "satisfying", "max_separation", "global_min", "worst_gap", "counterexamples"});
  const auto t0 = Clock::now();
  for (const auto& spec : s.instances) {
    const geometry::TheoremReport rep = geometry::theorem_bruteforce(spec.build(), s.exhaustive);
    total += rep.counterexamples.size();
    ordered_json counter = ordered_json::array();
    for (std::size_t i = 0; i < rep.counterexamples.size() && i < 5; ++i)
      counter.push_back({{"assignment", rep.counterexamples[i].assignment}, {"min_loss", rep.counterexamples[i].min_loss}});
    instances.push_back({{"name", rep.name},
                         {"assignments", rep.assignments},
                         {"satisfying", rep.satisfying},
                         {"max_separation", rep.max_separation},
                         {"global_min", rep.global_min},
                         {"global_min_exhaustive", rep.global_min_exhaustive ? ordered_json(*rep.global_min_exhaustive)
                                                                             : ordered_json(nullptr)},
                         {"worst_gap", rep.worst_gap},
                         {"counterexamples", rep.counterexamples.size()},
                         {"first_counterexamples", counter}});
    csv.add({rep.name, std::to_string(rep.assignments), std::to_string(rep.satisfying), format_number(rep.max_separation),
             format_number(rep.global_min), format_number(rep.worst_gap), std::to_string(rep.counterexamples.size())});
  }
  ctx.timings["theorem_oracle"] = seconds_since(t0);
  ctx.result.report["results"] = {{"instances", instances}, {"counterexamples", total}};
  ctx.result.criteria.push_back(at_most("theorem_counterexamples", static_cast<double>(total),
                                        static_cast<double>(ctx.cfg.acceptance.max_counterexamples.value_or(0))));
}

void run_parity(Context& ctx, bool snapshots) {
  const auto& cfg = ctx.cfg;
  const data::Split split = data::make_dataset(cfg.dataset);
  const data::Dataset* test = split.test.size() > 0 ? &split.test : nullptr;
  const model::TwoModuleModel init = model::TwoModuleModel::create(cfg.architecture, cfg.model_seed);

  train::TrainConfig input_cfg = cfg.train, output_cfg = cfg.output_train, e2e_cfg = cfg.train;
  input_cfg.snapshot_features = e2e_cfg.snapshot_features = snapshots || cfg.train.snapshot_features;
  e2e_cfg.loss = cfg.output_train.loss;

  model::TwoModuleModel modular = init.clone();
  auto t0 = Clock::now();
  const auto stage1 = train::train_input_module(modular, split.train, input_cfg, test);
  const auto stage2 = train::freeze_and_train_output(modular, split.train, output_cfg, test);
  ctx.timings["modular"] = seconds_since(t0);

  model::TwoModuleModel e2e = init.clone();
  t0 = Clock::now();
  const auto joint = train::train_end_to_end(e2e, split.train, e2e_cfg, test);
  ctx.timings["end_to_end"] = seconds_since(t0);

  write_trace_csv(ctx.dir / "trace_input.csv", stage1);
  write_trace_csv(ctx.dir / "trace_output.csv", stage2);
  write_trace_csv(ctx.dir / "trace_end_to_end.csv", joint);
  if (input_cfg.snapshot_features && cfg.architecture.feature_dim() == 2) {
    write_snapshot_csv(ctx.dir / "features_modular.csv", stage1);
    write_snapshot_csv(ctx.dir / "features_end_to_end.csv", joint);
  }
  modular.save((ctx.dir / "checkpoint_modular.json").string());
  e2e.save((ctx.dir / "checkpoint_end_to_end.json").string());

  const double acc_mod = model::accuracy(modular.predict(split.train.inputs), split.train.labels);
  const double acc_e2e = model::accuracy(e2e.predict(split.train.inputs), split.train.labels);
  const auto final_proxy = train::proxy_value(modular, split.train, cfg.train.proxy);
  ctx.result.report["results"] = {{"class_counts", data::class_counts(split.train)},
                                  {"input_stage", trace_json(stage1)},
                                  {"output_stage", trace_json(stage2)},
                                  {"end_to_end", trace_json(joint)},
                                  {"modular_train_accuracy", acc_mod},
                                  {"end_to_end_train_accuracy", acc_e2e},
                                  {"accuracy_gap", std::fabs(acc_mod - acc_e2e)},
                                  {"final_proxy", final_proxy ? ordered_json(*final_proxy) : ordered_json(nullptr)}};
  const auto& a = cfg.acceptance;
  if (a.min_train_accuracy) {
    ctx.result.criteria.push_back(at_least("modular_train_accuracy", acc_mod, *a.min_train_accuracy));
    ctx.result.criteria.push_back(at_least("end_to_end_train_accuracy", acc_e2e, *a.min_train_accuracy));
  }
  if (a.max_accuracy_gap) ctx.result.criteria.push_back(at_most("accuracy_gap", std::fabs(acc_mod - acc_e2e), *a.max_accuracy_gap));
  if (a.min_final_proxy) {
    ctx.result.criteria.push_back(
        at_least("final_proxy", final_proxy.value_or(-std::numeric_limits<double>::infinity()), *a.min_final_proxy));
  }
}

void run_sweep(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const data::Split split = data::make_dataset(cfg.dataset);
  model::TwoModuleModel m = model::TwoModuleModel::create(cfg.architecture, cfg.model_seed);
  const auto t0 = Clock::now();
  const auto rows = train::proxy_accuracy_sweep(m, split.train, split.test, cfg.sweep->checkpoints, cfg.train,
                                                cfg.output_train, cfg.sweep->output_seed);
  ctx.timings["sweep"] = seconds_since(t0);
  Csv csv(ctx.dir / "sweep.csv", {"epoch", "proxy", "train_accuracy", "test_accuracy"});
  ordered_json table = ordered_json::array();
  std::vector<double> proxies, accs;
  for (const auto& r : rows) {
    csv.add({std::to_string(r.epoch), format_number(r.proxy), format_number(r.train_accuracy),
             format_number(r.test_accuracy)});
    table.push_back({{"epoch", r.epoch}, {"proxy", r.proxy}, {"train_accuracy", r.train_accuracy},
                     {"test_accuracy", r.test_accuracy}});
    proxies.push_back(r.proxy);
    accs.push_back(r.test_accuracy);
  }
  const double rho = rows.size() >= 2 ? stats::spearman(proxies, accs) : 0.0;
  m.save((ctx.dir / "checkpoint_final.json").string());
  ctx.result.report["results"] = {{"rows", table}, {"spearman", rho}};
  if (cfg.acceptance.min_spearman) ctx.result.criteria.push_back(at_least("spearman", rho, *cfg.acceptance.min_spearman));
}

void run_label_efficiency(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto& s = *cfg.label_efficiency;
  const data::Split split = data::make_dataset(cfg.dataset);
  if (split.test.size() == 0) throw ConfigError("label-efficiency needs a test split (dataset.train_fraction < 1)");
  model::TwoModuleModel m = model::TwoModuleModel::create(cfg.architecture, cfg.model_seed);
  auto t0 = Clock::now();
  const auto stage1 = train::train_input_module(m, split.train, cfg.train, &split.test);
  ctx.timings["input_stage"] = seconds_since(t0);
  write_trace_csv(ctx.dir / "trace_input.csv", stage1);
  m.save((ctx.dir / "checkpoint_input.json").string());

  std::vector<std::size_t> budgets = s.budgets;
  budgets.push_back(split.train.size());  // full-label reference
  t0 = Clock::now();
  const auto rows = train::label_efficiency_run(m, split.train, split.test, budgets, s.balanced, s.seed, cfg.output_train);
  ctx.timings["output_stages"] = seconds_since(t0);
  const double full = rows.back().test_accuracy;

  std::vector<std::string> header = {"budget", "labeled", "train_accuracy", "test_accuracy", "relative_accuracy"};
  for (std::size_t c = 0; c < split.train.num_classes; ++c) header.push_back("recall_" + std::to_string(c));
  Csv csv(ctx.dir / "label_efficiency.csv", header);
  ordered_json table = ordered_json::array();
  for (const auto& r : rows) {
    const double rel = full > 0.0 ? r.test_accuracy / full : 0.0;
    std::vector<std::string> row = {std::to_string(r.budget), std::to_string(r.labeled), format_number(r.train_accuracy),
                                    format_number(r.test_accuracy), format_number(rel)};
    for (double v : r.recall) row.push_back(format_number(v));
    csv.add(row);
    table.push_back({{"budget", r.budget}, {"labeled", r.labeled}, {"train_accuracy", r.train_accuracy},
                     {"test_accuracy", r.test_accuracy}, {"relative_accuracy", rel}, {"recall", r.recall}});
  }
  // The smallest requested budget is the one held to the threshold.
  std::size_t smallest = 0;
  for (std::size_t i = 1; i + 1 < rows.size(); ++i)
    if (rows[i].budget < rows[smallest].budget) smallest = i;
  const double rel_min = full > 0.0 ? rows[smallest].test_accuracy / full : 0.0;
  ctx.result.report["results"] = {{"input_stage", trace_json(stage1)},
                                  {"full_label_test_accuracy", full},
                                  {"smallest_budget", rows[smallest].budget},
                                  {"smallest_budget_relative_accuracy", rel_min},
                                  {"rows", table}};
  if (cfg.acceptance.min_relative_accuracy) {
    ctx.result.criteria.push_back(at_least("smallest_budget_relative_accuracy", rel_min, *cfg.acceptance.min_relative_accuracy));
  }
}

std::string task_name(const std::array<int, 2>& t) { return "c" + std::to_string(t[0]) + "c" + std::to_string(t[1]); }

void run_transfer(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto& s = *cfg.transfer;
  const data::Split split = data::make_dataset(cfg.dataset);
  if (split.test.size() == 0) throw ConfigError("transferability needs a test split (dataset.train_fraction < 1)");
  model::Architecture arch = cfg.architecture;
  arch.outputs = 2;

  struct Task {
    std::string name;
    data::Dataset train, test;
  };
  std::vector<Task> tasks;
  for (const auto& t : s.tasks) {
    const std::vector<int> classes = {t[0], t[1]};
    tasks.push_back({task_name(t), data::restrict_to_classes(split.train, classes),
                     data::restrict_to_classes(split.test, classes)});
  }

  // One modularly trained model per source task.
  std::vector<transfer::CandidateModule> candidates;
  ordered_json sources = ordered_json::array();
  Csv source_csv(ctx.dir / "sources.csv", {"task", "final_proxy", "train_accuracy", "test_accuracy"});
  auto t0 = Clock::now();
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    model::TwoModuleModel m = model::TwoModuleModel::create(arch, cfg.model_seed + i);
    train::train_input_module(m, tasks[i].train, cfg.train);
    train::freeze_and_train_output(m, tasks[i].train, cfg.output_train);
    const auto p = train::proxy_value(m, tasks[i].train, cfg.train.proxy);
    const double tr = model::accuracy(m.predict(tasks[i].train.inputs), tasks[i].train.labels);
    const double te = model::accuracy(m.predict(tasks[i].test.inputs), tasks[i].test.labels);
    source_csv.add({tasks[i].name, cell(p), format_number(tr), format_number(te)});
    sources.push_back({{"task", tasks[i].name},
                       {"final_proxy", p ? ordered_json(*p) : ordered_json(nullptr)},
                       {"train_accuracy", tr},
                       {"test_accuracy", te}});
    m.save((ctx.dir / ("checkpoint_" + tasks[i].name + ".json")).string());
    candidates.push_back({tasks[i].name, tasks[i].name, std::move(m)});
  }
  ctx.timings["source_training"] = seconds_since(t0);

  double score_seconds = 0.0, oracle_seconds = 0.0;
  ordered_json targets = ordered_json::array();
  std::vector<double> correlations;
  Csv csv(ctx.dir / "transfer.csv", {"target", "candidate", "score", "rank", "oracle_accuracy", "oracle_rank"});
  Csv polar(ctx.dir / "polar.csv", {"target", "task", "angle", "radius"});
  for (const Task& target : tasks) {
    std::vector<double> scores, oracle;
    for (const auto& c : candidates) {
      t0 = Clock::now();
      scores.push_back(transfer::score_candidate(c, target.train, {s.proxy, s.subsample_fraction, s.seed, 10}));
      score_seconds += seconds_since(t0);
      t0 = Clock::now();
      oracle.push_back(transfer::retrain_oracle(c, target.train, target.test, cfg.output_train, s.oracle_seed));
      oracle_seconds += seconds_since(t0);
    }
    transfer::TransferReport rep = transfer::rank_candidates(candidates, scores);
    rep.target_task = target.name;
    transfer::attach_oracle(rep, oracle);
    ordered_json rows = ordered_json::array();
    for (const auto& c : rep.candidates) {
      csv.add({target.name, c.id, format_number(c.score), std::to_string(c.rank), cell(c.oracle_accuracy),
               std::to_string(*c.oracle_rank)});
      rows.push_back({{"candidate", c.id}, {"score", c.score}, {"rank", c.rank},
                      {"oracle_accuracy", *c.oracle_accuracy}, {"oracle_rank", *c.oracle_rank}});
    }
    for (const auto& p : transfer::polar_layout(rep))
      polar.add({target.name, p.task, format_number(p.angle), format_number(p.radius)});
    const double rho = rep.rank_correlation.value_or(0.0);
    correlations.push_back(rho);
    targets.push_back({{"target", target.name}, {"rank_correlation", rho}, {"candidates", rows}});
  }
  ctx.timings["scoring"] = score_seconds;
  ctx.timings["oracle"] = oracle_seconds;

  const double mean_rho = std::accumulate(correlations.begin(), correlations.end(), 0.0) /
                          static_cast<double>(correlations.size());
  const double min_rho = *std::min_element(correlations.begin(), correlations.end());
  ctx.result.report["results"] = {{"proxy", proxy::to_string(s.proxy)},
                                  {"subsample_fraction", s.subsample_fraction},
                                  {"sources", sources},
                                  {"targets", targets},
                                  {"mean_rank_correlation", mean_rho},
                                  {"min_rank_correlation", min_rho}};
  if (cfg.acceptance.min_rank_correlation) {
    ctx.result.criteria.push_back(at_least("mean_rank_correlation", mean_rho, *cfg.acceptance.min_rank_correlation));
  }
  const double ratio = oracle_seconds > 0.0 ? score_seconds / oracle_seconds : 0.0;
  ctx.result.metadata["cost_ratio"] = ratio;
  if (cfg.acceptance.max_cost_ratio) ctx.result.timing_criteria.push_back(at_most("cost_ratio", ratio, *cfg.acceptance.max_cost_ratio));
}

}  // namespace

bool RunResult::passed() const {
  for (const auto& c : criteria)
    if (!c.passed) return false;
  for (const auto& c : timing_criteria)
    if (!c.passed) return false;
  return true;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

RunResult run_experiment(const config::ExperimentConfig& cfg) {
  RunResult result;
  result.output_dir = config::resolve_output_dir(cfg);
  const fs::path dir(result.output_dir);
  fs::create_directories(dir);
  write_text(dir / "resolved_config.json", config::dump(cfg));

  result.metadata["started_at"] = utc_timestamp();
  Context ctx{cfg, dir, result};
  result.report["format"] = "kermod-report";
  result.report["version"] = 1;
  result.report["experiment"] = config::to_string(cfg.experiment);
  const auto t0 = Clock::now();
  switch (cfg.experiment) {
    case config::ExperimentKind::lemma_suite:
      run_lemma(ctx);
      break;
    case config::ExperimentKind::theorem_oracle:
      run_theorem(ctx);
      break;
    case config::ExperimentKind::sanity_dynamics:
      run_parity(ctx, true);
      break;
    case config::ExperimentKind::modular_vs_e2e:
      run_parity(ctx, false);
      break;
    case config::ExperimentKind::proxy_sweep:
      run_sweep(ctx);
      break;
    case config::ExperimentKind::label_efficiency:
      run_label_efficiency(ctx);
      break;
    case config::ExperimentKind::transferability:
      run_transfer(ctx);
      break;
  }
  ctx.timings["total"] = seconds_since(t0);

  ordered_json criteria = ordered_json::array();
  bool deterministic_pass = true;
  for (const auto& c : result.criteria) {
    criteria.push_back(criterion_json(c));
    deterministic_pass = deterministic_pass && c.passed;
  }
  result.report["criteria"] = criteria;
  result.report["passed"] = deterministic_pass;
  ordered_json timing = ordered_json::array();
  for (const auto& c : result.timing_criteria) timing.push_back(criterion_json(c));
  result.metadata["timing_criteria"] = timing;
  result.metadata["timings_seconds"] = ctx.timings;
  result.metadata["finished_at"] = utc_timestamp();
  result.metadata["passed"] = result.passed();

  write_json(dir / "report.json", result.report);
  write_json(dir / "metadata.json", result.metadata);
  return result;
}

}  // namespace kermod::experiments
