// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0

#include "kermod/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "kermod/errors.hpp"

namespace kermod::config {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Reads one JSON object, remembering which keys were consumed so that the
// rest can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError((path_.empty() ? "config" : path_) + " must be an object");
  }

  const json* find(const char* key) {
    used_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string at(const char* key) const { return join(path_, key); }

  void number(const char* key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(at(key) + ": expected a number");
      out = v->get<double>();
    }
  }
  void number(const char* key, std::optional<double>& out) {
    if (const json* v = find(key)) {
      if (v->is_null()) return;
      if (!v->is_number()) throw ConfigError(at(key) + ": expected a number");
      out = v->get<double>();
    }
  }
  template <typename U>
  void unsigned_int(const char* key, U& out) {
    if (const json* v = find(key)) out = as_unsigned<U>(*v, at(key));
  }
  template <typename U>
  void unsigned_int(const char* key, std::optional<U>& out) {
    if (const json* v = find(key)) {
      if (!v->is_null()) out = as_unsigned<U>(*v, at(key));
    }
  }
  void boolean(const char* key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(at(key) + ": expected true or false");
      out = v->get<bool>();
    }
  }
  void string(const char* key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(at(key) + ": expected a string");
      out = v->get<std::string>();
    }
  }
  template <typename E, typename Parse>
  void name(const char* key, E& out, Parse parse) {
    std::string s;
    if (!j_.contains(key)) {
      used_.insert(key);
      return;
    }
    string(key, s);
    try {
      out = parse(s);
    } catch (const ConfigError& e) {
      throw ConfigError(at(key) + ": " + e.what());
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      (void)value;
      if (!used_.contains(key)) throw ConfigError("unknown key '" + join(path_, key) + "'");
    }
  }

  template <typename U>
  static U as_unsigned(const json& v, const std::string& where) {
    if (!v.is_number_unsigned()) throw ConfigError(where + ": expected a nonnegative integer");
    return static_cast<U>(v.get<std::uint64_t>());
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

const json& require_array(const json* v, const std::string& where) {
  if (v == nullptr || !v->is_array()) throw ConfigError(where + ": expected an array");
  return *v;
}

std::string indexed(const std::string& where, std::size_t i) { return where + "[" + std::to_string(i) + "]"; }

void read_dataset(const json& j, data::DatasetSpec& d) {
  ObjectReader r(j, "dataset");
  r.name("kind", d.kind, data::parse_dataset_kind);
  r.unsigned_int("n", d.n);
  r.unsigned_int("d", d.d);
  r.unsigned_int("classes", d.classes);
  r.unsigned_int("seed", d.seed);
  r.number("train_fraction", d.train_fraction);
  r.number("separation", d.separation);
  r.number("noise", d.noise);
  r.string("path", d.path);
  r.string("labels_path", d.labels_path);
  r.unsigned_int("limit", d.limit);
  r.finish();
  if (!(d.train_fraction > 0.0 && d.train_fraction <= 1.0)) throw ConfigError("dataset.train_fraction must lie in (0, 1]");
  if ((d.kind == data::DatasetKind::csv_file || d.kind == data::DatasetKind::idx_file) && d.path.empty()) {
    throw ConfigError("dataset.path is required for " + data::to_string(d.kind));
  }
  if (d.kind == data::DatasetKind::idx_file && d.labels_path.empty()) {
    throw ConfigError("dataset.labels_path is required for idx-file");
  }
  if ((d.kind == data::DatasetKind::random_label || d.kind == data::DatasetKind::gaussian_blobs) &&
      (d.n == 0 || d.d == 0 || d.classes == 0)) {
    throw ConfigError("dataset.n, dataset.d and dataset.classes must be positive");
  }
}

void read_architecture(const json& j, model::Architecture& a) {
  ObjectReader r(j, "architecture");
  if (const json* w = r.find("input_widths")) {
    const json& arr = require_array(w, r.at("input_widths"));
    a.input_widths.clear();
    for (std::size_t i = 0; i < arr.size(); ++i)
      a.input_widths.push_back(ObjectReader::as_unsigned<std::size_t>(arr[i], indexed(r.at("input_widths"), i)));
  }
  r.name("hidden_activation", a.hidden_activation, parse_activation);
  r.name("link", a.link, parse_activation);
  r.boolean("normalize_link", a.normalize_link);
  r.number("epsilon", a.epsilon);
  r.unsigned_int("outputs", a.outputs);
  r.finish();
  try {
    a.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(e.what()));
  }
}

void read_train(const json& j, const std::string& path, train::TrainConfig& t) {
  ObjectReader r(j, path);
  r.unsigned_int("batch_size", t.batch_size);
  if (const json* s = r.find("schedule")) {
    const json& arr = require_array(s, r.at("schedule"));
    t.schedule.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      ObjectReader sr(arr[i], indexed(r.at("schedule"), i));
      train::Stage stage;
      sr.number("learning_rate", stage.learning_rate);
      sr.unsigned_int("epochs", stage.epochs);
      sr.finish();
      if (!(stage.learning_rate > 0.0)) throw ConfigError(sr.at("learning_rate") + " must be positive");
      t.schedule.push_back(stage);
    }
  }
  r.number("momentum", t.momentum);
  r.number("clip_norm", t.clip_norm);
  r.unsigned_int("seed", t.seed);
  r.name("proxy", t.proxy, proxy::parse_proxy);
  r.name("loss", t.loss, loss::parse_loss);
  r.unsigned_int("trace_every", t.trace_every);
  r.boolean("stop_on_plateau", t.stop_on_plateau);
  r.number("plateau_tolerance", t.plateau_tolerance);
  r.unsigned_int("plateau_window", t.plateau_window);
  r.unsigned_int("max_batch_retries", t.max_batch_retries);
  r.boolean("snapshot_features", t.snapshot_features);
  r.finish();
  try {
    t.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::vector<std::size_t> read_uint_list(const json* v, const std::string& where) {
  const json& arr = require_array(v, where);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(ObjectReader::as_unsigned<std::size_t>(arr[i], indexed(where, i)));
  return out;
}

SweepSection read_sweep(const json& j) {
  SweepSection s;
  ObjectReader r(j, "sweep");
  if (const json* c = r.find("checkpoints")) s.checkpoints = read_uint_list(c, r.at("checkpoints"));
  r.unsigned_int("output_seed", s.output_seed);
  r.finish();
  if (s.checkpoints.empty()) throw ConfigError("sweep.checkpoints must not be empty");
  for (std::size_t i = 1; i < s.checkpoints.size(); ++i)
    if (s.checkpoints[i] < s.checkpoints[i - 1]) throw ConfigError("sweep.checkpoints must be nondecreasing");
  return s;
}

LabelEfficiencySection read_label_efficiency(const json& j) {
  LabelEfficiencySection s;
  ObjectReader r(j, "label_efficiency");
  if (const json* b = r.find("budgets")) s.budgets = read_uint_list(b, r.at("budgets"));
  r.boolean("balanced", s.balanced);
  r.unsigned_int("seed", s.seed);
  r.finish();
  if (s.budgets.empty()) throw ConfigError("label_efficiency.budgets must not be empty");
  return s;
}

TransferSection read_transfer(const json& j) {
  TransferSection s;
  ObjectReader r(j, "transfer");
  if (const json* t = r.find("tasks")) {
    const json& arr = require_array(t, r.at("tasks"));
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto pair = read_uint_list(&arr[i], indexed(r.at("tasks"), i));
      if (pair.size() != 2 || pair[0] == pair[1]) {
        throw ConfigError(indexed(r.at("tasks"), i) + ": expected two distinct class indices");
      }
      s.tasks.push_back({static_cast<int>(pair[0]), static_cast<int>(pair[1])});
    }
  }
  r.name("proxy", s.proxy, proxy::parse_proxy);
  r.number("subsample_fraction", s.subsample_fraction);
  r.unsigned_int("seed", s.seed);
  r.unsigned_int("oracle_seed", s.oracle_seed);
  r.finish();
  if (!(s.subsample_fraction > 0.0 && s.subsample_fraction <= 1.0)) {
    throw ConfigError("transfer.subsample_fraction must lie in (0, 1]");
  }
  return s;
}

LemmaSection read_lemma(const json& j) {
  LemmaSection s;
  ObjectReader r(j, "lemma");
  r.unsigned_int("count", s.count);
  r.unsigned_int("seed", s.seed);
  r.unsigned_int("d_min", s.d_min);
  r.unsigned_int("d_max", s.d_max);
  r.finish();
  if (s.count == 0) throw ConfigError("lemma.count must be positive");
  if (s.d_min < 1 || s.d_max < s.d_min) throw ConfigError("lemma: need 1 <= d_min <= d_max");
  return s;
}

TheoremInstanceSpec read_instance(const json& j, const std::string& path) {
  TheoremInstanceSpec s;
  ObjectReader r(j, path);
  r.string("name", s.name);
  {
    const json& arr = require_array(r.find("positive"), r.at("positive"));
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (!arr[i].is_boolean()) throw ConfigError(indexed(r.at("positive"), i) + ": expected true or false");
      s.positive.push_back(arr[i].get<bool>());
    }
  }
  {
    const json& arr = require_array(r.find("grid"), r.at("grid"));
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const json& code = require_array(&arr[i], indexed(r.at("grid"), i));
      std::vector<double> v;
      for (const json& x : code) {
        if (!x.is_number()) throw ConfigError(indexed(r.at("grid"), i) + ": expected numbers");
        v.push_back(x.get<double>());
      }
      s.grid.push_back(std::move(v));
    }
  }
  r.name("nonlinearity", s.nonlinearity, parse_activation);
  r.boolean("normalize", s.normalize);
  r.name("loss", s.loss, loss::parse_loss);
  r.number("lambda", s.lambda);
  r.number("weight_bound", s.weight_bound);
  r.unsigned_int("weight_steps", s.weight_steps);
  r.finish();
  if (s.name.empty()) throw ConfigError(path + ".name must not be empty");
  if (s.grid.empty()) throw ConfigError(path + ".grid must not be empty");
  for (const auto& code : s.grid)
    if (code.size() != s.grid.front().size() || code.empty()) {
      throw ConfigError(path + ".grid codes must share one positive dimension");
    }
  return s;
}

TheoremSection read_theorem(const json& j) {
  TheoremSection s;
  ObjectReader r(j, "theorem");
  const json& arr = require_array(r.find("instances"), r.at("instances"));
  for (std::size_t i = 0; i < arr.size(); ++i) s.instances.push_back(read_instance(arr[i], indexed(r.at("instances"), i)));
  r.boolean("exhaustive", s.exhaustive);
  r.finish();
  if (s.instances.empty()) throw ConfigError("theorem.instances must not be empty");
  return s;
}

AcceptanceSection read_acceptance(const json& j) {
  AcceptanceSection a;
  ObjectReader r(j, "acceptance");
  r.number("min_train_accuracy", a.min_train_accuracy);
  r.number("max_accuracy_gap", a.max_accuracy_gap);
  r.number("min_final_proxy", a.min_final_proxy);
  r.number("min_spearman", a.min_spearman);
  r.number("min_relative_accuracy", a.min_relative_accuracy);
  r.number("min_rank_correlation", a.min_rank_correlation);
  r.number("max_cost_ratio", a.max_cost_ratio);
  r.unsigned_int("max_failures", a.max_failures);
  r.unsigned_int("max_counterexamples", a.max_counterexamples);
  r.finish();
  return a;
}

ordered_json train_json(const train::TrainConfig& t) {
  ordered_json j;
  j["batch_size"] = t.batch_size;
  ordered_json sched = ordered_json::array();
  for (const auto& s : t.schedule) sched.push_back({{"learning_rate", s.learning_rate}, {"epochs", s.epochs}});
  j["schedule"] = std::move(sched);
  j["momentum"] = t.momentum;
  j["clip_norm"] = t.clip_norm;
  j["seed"] = t.seed;
  j["proxy"] = proxy::to_string(t.proxy);
  j["loss"] = loss::to_string(t.loss);
  j["trace_every"] = t.trace_every;
  j["stop_on_plateau"] = t.stop_on_plateau;
  j["plateau_tolerance"] = t.plateau_tolerance;
  j["plateau_window"] = t.plateau_window;
  j["max_batch_retries"] = t.max_batch_retries;
  j["snapshot_features"] = t.snapshot_features;
  return j;
}

template <typename T>
void put_optional(ordered_json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

// Line and column (1-based) of a byte offset.
std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

ExperimentKind parse_experiment_kind(std::string_view name) {
  if (name == "sanity-dynamics") return ExperimentKind::sanity_dynamics;
  if (name == "proxy-sweep") return ExperimentKind::proxy_sweep;
  if (name == "modular-vs-e2e") return ExperimentKind::modular_vs_e2e;
  if (name == "label-efficiency") return ExperimentKind::label_efficiency;
  if (name == "transferability") return ExperimentKind::transferability;
  if (name == "lemma-suite") return ExperimentKind::lemma_suite;
  if (name == "theorem-oracle") return ExperimentKind::theorem_oracle;
  throw ConfigError("unknown experiment '" + std::string(name) +
                    "' (expected sanity-dynamics, proxy-sweep, modular-vs-e2e, label-efficiency, transferability, "
                    "lemma-suite or theorem-oracle)");
}

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::sanity_dynamics:
      return "sanity-dynamics";
    case ExperimentKind::proxy_sweep:
      return "proxy-sweep";
    case ExperimentKind::modular_vs_e2e:
      return "modular-vs-e2e";
    case ExperimentKind::label_efficiency:
      return "label-efficiency";
    case ExperimentKind::transferability:
      return "transferability";
    case ExperimentKind::lemma_suite:
      return "lemma-suite";
    case ExperimentKind::theorem_oracle:
      return "theorem-oracle";
  }
  return "unknown";
}

geometry::TheoremInstance TheoremInstanceSpec::build() const {
  geometry::TheoremInstance inst;
  inst.name = name;
  inst.positive = positive;
  inst.grid = grid;
  inst.feature = {nonlinearity, normalize, 1e-12};
  inst.loss = loss::make_loss(loss, lambda);
  inst.weights = geometry::make_weight_lattice(grid.front().size(), weight_bound, weight_steps);
  return inst;
}

bool operator==(const data::DatasetSpec& a, const data::DatasetSpec& b) {
  return a.kind == b.kind && a.n == b.n && a.d == b.d && a.classes == b.classes && a.seed == b.seed &&
         a.train_fraction == b.train_fraction && a.separation == b.separation && a.noise == b.noise &&
         a.path == b.path && a.labels_path == b.labels_path && a.limit == b.limit;
}

ExperimentConfig from_json(const json& doc) {
  ExperimentConfig cfg;
  ObjectReader r(doc, "");
  if (!doc.contains("experiment")) throw ConfigError("missing required key 'experiment'");
  r.name("experiment", cfg.experiment, parse_experiment_kind);
  if (const json* d = r.find("dataset")) read_dataset(*d, cfg.dataset);
  if (const json* a = r.find("architecture")) read_architecture(*a, cfg.architecture);
  r.unsigned_int("model_seed", cfg.model_seed);
  if (const json* t = r.find("train")) read_train(*t, "train", cfg.train);
  if (const json* t = r.find("output_train")) read_train(*t, "output_train", cfg.output_train);
  r.string("output_dir", cfg.output_dir);
  if (const json* s = r.find("sweep")) cfg.sweep = read_sweep(*s);
  if (const json* s = r.find("label_efficiency")) cfg.label_efficiency = read_label_efficiency(*s);
  if (const json* s = r.find("transfer")) cfg.transfer = read_transfer(*s);
  if (const json* s = r.find("lemma")) cfg.lemma = read_lemma(*s);
  if (const json* s = r.find("theorem")) cfg.theorem = read_theorem(*s);
  if (const json* s = r.find("acceptance")) cfg.acceptance = read_acceptance(*s);
  r.finish();

  if (cfg.output_dir.empty()) cfg.output_dir = "runs/" + to_string(cfg.experiment);
  // Sections the experiment needs are filled with defaults.
  switch (cfg.experiment) {
    case ExperimentKind::proxy_sweep:
      if (!cfg.sweep) cfg.sweep = SweepSection{};
      break;
    case ExperimentKind::label_efficiency:
      if (!cfg.label_efficiency) cfg.label_efficiency = LabelEfficiencySection{};
      break;
    case ExperimentKind::transferability:
      if (!cfg.transfer) cfg.transfer = TransferSection{};
      if (cfg.transfer->tasks.size() < 3) throw ConfigError("transfer.tasks needs at least three tasks");
      for (const auto& t : cfg.transfer->tasks)
        for (int c : t)
          if (static_cast<std::size_t>(c) >= cfg.dataset.classes) {
            throw ConfigError("transfer.tasks: class " + std::to_string(c) + " is not in the dataset");
          }
      break;
    case ExperimentKind::lemma_suite:
      if (!cfg.lemma) cfg.lemma = LemmaSection{};
      break;
    case ExperimentKind::theorem_oracle:
      if (!cfg.theorem) throw ConfigError("theorem-oracle needs a 'theorem' section with instances");
      break;
    default:
      break;
  }
  const bool trains_input = cfg.experiment == ExperimentKind::sanity_dynamics ||
                            cfg.experiment == ExperimentKind::proxy_sweep ||
                            cfg.experiment == ExperimentKind::modular_vs_e2e ||
                            cfg.experiment == ExperimentKind::label_efficiency;
  if (cfg.architecture.normalize_link) {
    const double beta = kernel::kernel_bounds(cfg.architecture.link).beta;
    auto check = [&](const char* field, proxy::ProxyKind kind) {
      try {
        proxy::require_defined(kind, beta);
      } catch (const UndefinedProxyError& e) {
        throw UndefinedProxyError(std::string(field) + ": " + e.what());
      }
    };
    if (trains_input) check("train.proxy", cfg.train.proxy);
    if (cfg.transfer) check("transfer.proxy", cfg.transfer->proxy);
  }
  return cfg;
}

ExperimentConfig parse(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    std::string what = e.what();
    // Drop the library prefix "[json.exception.parse_error.101] ".
    if (const auto pos = what.find("] "); pos != std::string::npos) what = what.substr(pos + 2);
    // and its own position, which repeats ours
    if (what.starts_with("parse error at line"))
      if (const auto pos = what.find(": "); pos != std::string::npos) what = what.substr(pos + 2);
    throw ConfigError("config syntax error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                      what);
  }
  return from_json(doc);
}

ExperimentConfig load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

ordered_json to_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["experiment"] = to_string(cfg.experiment);
  const auto& d = cfg.dataset;
  j["dataset"] = {{"kind", data::to_string(d.kind)},
                  {"n", d.n},
                  {"d", d.d},
                  {"classes", d.classes},
                  {"seed", d.seed},
                  {"train_fraction", d.train_fraction},
                  {"separation", d.separation},
                  {"noise", d.noise},
                  {"path", d.path},
                  {"labels_path", d.labels_path},
                  {"limit", d.limit}};
  j["architecture"] = model::to_json(cfg.architecture);
  j["model_seed"] = cfg.model_seed;
  j["train"] = train_json(cfg.train);
  j["output_train"] = train_json(cfg.output_train);
  j["output_dir"] = cfg.output_dir;
  if (cfg.sweep) j["sweep"] = {{"checkpoints", cfg.sweep->checkpoints}, {"output_seed", cfg.sweep->output_seed}};
  if (cfg.label_efficiency) {
    j["label_efficiency"] = {{"budgets", cfg.label_efficiency->budgets},
                             {"balanced", cfg.label_efficiency->balanced},
                             {"seed", cfg.label_efficiency->seed}};
  }
  if (cfg.transfer) {
    const auto& t = *cfg.transfer;
    ordered_json tasks = ordered_json::array();
    for (const auto& p : t.tasks) tasks.push_back({p[0], p[1]});
    j["transfer"] = {{"tasks", tasks},
                     {"proxy", proxy::to_string(t.proxy)},
                     {"subsample_fraction", t.subsample_fraction},
                     {"seed", t.seed},
                     {"oracle_seed", t.oracle_seed}};
  }
  if (cfg.lemma) {
    j["lemma"] = {{"count", cfg.lemma->count},
                  {"seed", cfg.lemma->seed},
                  {"d_min", cfg.lemma->d_min},
                  {"d_max", cfg.lemma->d_max}};
  }
  if (cfg.theorem) {
    ordered_json instances = ordered_json::array();
    for (const auto& s : cfg.theorem->instances) {
      ordered_json grid = ordered_json::array();
      for (const auto& code : s.grid) grid.push_back(code);
      ordered_json positive = ordered_json::array();
      for (bool b : s.positive) positive.push_back(b);
      instances.push_back({{"name", s.name},
                           {"positive", positive},
                           {"grid", grid},
                           {"nonlinearity", to_string(s.nonlinearity)},
                           {"normalize", s.normalize},
                           {"loss", loss::to_string(s.loss)},
                           {"lambda", s.lambda},
                           {"weight_bound", s.weight_bound},
                           {"weight_steps", s.weight_steps}});
    }
    j["theorem"] = {{"instances", instances}, {"exhaustive", cfg.theorem->exhaustive}};
  }
  ordered_json acc = ordered_json::object();
  const auto& a = cfg.acceptance;
  put_optional(acc, "min_train_accuracy", a.min_train_accuracy);
  put_optional(acc, "max_accuracy_gap", a.max_accuracy_gap);
  put_optional(acc, "min_final_proxy", a.min_final_proxy);
  put_optional(acc, "min_spearman", a.min_spearman);
  put_optional(acc, "min_relative_accuracy", a.min_relative_accuracy);
  put_optional(acc, "min_rank_correlation", a.min_rank_correlation);
  put_optional(acc, "max_cost_ratio", a.max_cost_ratio);
  put_optional(acc, "max_failures", a.max_failures);
  put_optional(acc, "max_counterexamples", a.max_counterexamples);
  j["acceptance"] = std::move(acc);
  return j;
}

std::string dump(const ExperimentConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

std::string resolve_output_dir(const ExperimentConfig& cfg) {
  const std::filesystem::path dir(cfg.output_dir);
  const char* root = std::getenv("KERMOD_OUTPUT_ROOT");
  if (root != nullptr && *root != '\0' && dir.is_relative()) return (std::filesystem::path(root) / dir).string();
  return dir.string();
}

}  // namespace kermod::config
