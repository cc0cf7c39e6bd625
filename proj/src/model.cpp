// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0

#include "kermod/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "kermod/errors.hpp"
#include "kermod/random.hpp"

namespace kermod::model {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kFormat = "kermod-checkpoint";
constexpr int kVersion = 1;

ordered_json tensor_json(const std::string& name, const ad::Tensor& t) {
  ordered_json j;
  j["name"] = name;
  j["shape"] = t.shape();
  j["values"] = std::vector<double>(t.data().begin(), t.data().end());
  return j;
}

ad::Tensor copy_parameter(const ad::Tensor& t) {
  return ad::Tensor::parameter(t.shape(), std::vector<double>(t.data().begin(), t.data().end()));
}

const json& require_key(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  return j.at(key);
}

}  // namespace

void Architecture::validate() const {
  if (input_widths.size() < 2) throw ConfigError("architecture.input_widths needs at least two entries");
  for (std::size_t w : input_widths)
    if (w == 0) throw ConfigError("architecture.input_widths entries must be positive");
  if (outputs == 0) throw ConfigError("architecture.outputs must be positive");
  if (!(epsilon > 0.0)) throw ConfigError("architecture.epsilon must be positive");
}

ordered_json to_json(const Architecture& arch) {
  ordered_json j;
  j["input_widths"] = arch.input_widths;
  j["hidden_activation"] = to_string(arch.hidden_activation);
  j["link"] = to_string(arch.link);
  j["normalize_link"] = arch.normalize_link;
  j["epsilon"] = arch.epsilon;
  j["outputs"] = arch.outputs;
  return j;
}

Architecture architecture_from_json(const json& j) {
  Architecture arch;
  arch.input_widths = require_key(j, "input_widths", "architecture").get<std::vector<std::size_t>>();
  arch.hidden_activation = parse_activation(require_key(j, "hidden_activation", "architecture").get<std::string>());
  arch.link = parse_activation(require_key(j, "link", "architecture").get<std::string>());
  arch.normalize_link = require_key(j, "normalize_link", "architecture").get<bool>();
  arch.epsilon = require_key(j, "epsilon", "architecture").get<double>();
  arch.outputs = require_key(j, "outputs", "architecture").get<std::size_t>();
  arch.validate();
  return arch;
}

TwoModuleModel::Layer TwoModuleModel::make_layer(std::size_t fan_in, std::size_t fan_out, std::uint64_t seed) {
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<double> w(fan_in * fan_out), b(fan_out);
  for (double& v : w) v = rng.uniform(-bound, bound);
  for (double& v : b) v = rng.uniform(-bound, bound);
  return {ad::Tensor::parameter({fan_in, fan_out}, std::move(w)), ad::Tensor::parameter({fan_out}, std::move(b))};
}

TwoModuleModel TwoModuleModel::create(const Architecture& arch, std::uint64_t seed) {
  arch.validate();
  TwoModuleModel m;
  m.arch_ = arch;
  Rng master(seed);
  for (std::size_t l = 0; l + 1 < arch.input_widths.size(); ++l)
    m.input_layers_.push_back(make_layer(arch.input_widths[l], arch.input_widths[l + 1], master.fork()));
  m.output_ = make_layer(arch.feature_dim(), arch.outputs, master.fork());
  return m;
}

kernel::FeatureMap TwoModuleModel::link() const { return {arch_.link, arch_.normalize_link, arch_.epsilon}; }

kernel::KernelSpec TwoModuleModel::kernel_spec() const {
  if (!arch_.normalize_link) throw ConfigError("kernel bounds need a normalized link (normalize_link = true)");
  return kernel::KernelSpec::for_nonlinearity(arch_.link, arch_.epsilon);
}

ad::Tensor TwoModuleModel::input_forward(const ad::Tensor& x) const {
  ad::Tensor h = x;
  for (std::size_t l = 0; l < input_layers_.size(); ++l) {
    h = ad::affine(h, input_layers_[l].weight, input_layers_[l].bias);
    if (l + 1 < input_layers_.size()) h = ad::elementwise(h, arch_.hidden_activation);
  }
  return h;
}

ad::Tensor TwoModuleModel::features(const ad::Tensor& x) const { return link().apply(input_forward(x)); }

ad::Tensor TwoModuleModel::output_forward(const ad::Tensor& features) const {
  return ad::affine(features, output_.weight, output_.bias);
}

ad::Tensor TwoModuleModel::forward(const ad::Tensor& x) const { return output_forward(features(x)); }

Matrix TwoModuleModel::pre_link(const Matrix& x) const { return input_forward(ad::Tensor::from_matrix(x)).to_matrix(); }

Matrix TwoModuleModel::embed(const Matrix& x) const { return features(ad::Tensor::from_matrix(x)).to_matrix(); }

Matrix TwoModuleModel::scores_from_features(const Matrix& features) const {
  return output_forward(ad::Tensor::from_matrix(features)).to_matrix();
}

Matrix TwoModuleModel::scores(const Matrix& x) const { return forward(ad::Tensor::from_matrix(x)).to_matrix(); }

std::vector<int> TwoModuleModel::predict_from_scores(const Matrix& scores) const {
  std::vector<int> out(scores.rows);
  for (std::size_t i = 0; i < scores.rows; ++i) {
    if (scores.cols == 1) {
      out[i] = scores(i, 0) > 0.0 ? 1 : 0;
      continue;
    }
    // First maximum wins ties.
    std::size_t best = 0;
    for (std::size_t c = 1; c < scores.cols; ++c)
      if (scores(i, c) > scores(i, best)) best = c;
    out[i] = static_cast<int>(best);
  }
  return out;
}

std::vector<int> TwoModuleModel::predict(const Matrix& x) const { return predict_from_scores(scores(x)); }

std::vector<ad::Tensor> TwoModuleModel::input_parameters() const {
  std::vector<ad::Tensor> out;
  for (const Layer& l : input_layers_) {
    out.push_back(l.weight);
    out.push_back(l.bias);
  }
  return out;
}

std::vector<ad::Tensor> TwoModuleModel::output_parameters() const { return {output_.weight, output_.bias}; }

std::vector<ad::Tensor> TwoModuleModel::parameters() const {
  std::vector<ad::Tensor> out = input_parameters();
  out.push_back(output_.weight);
  out.push_back(output_.bias);
  return out;
}

TwoModuleModel TwoModuleModel::clone() const {
  TwoModuleModel m;
  m.arch_ = arch_;
  for (const Layer& l : input_layers_) m.input_layers_.push_back({copy_parameter(l.weight), copy_parameter(l.bias)});
  m.output_ = {copy_parameter(output_.weight), copy_parameter(output_.bias)};
  return m;
}

void TwoModuleModel::reset_output(std::uint64_t seed) { output_ = make_layer(arch_.feature_dim(), arch_.outputs, seed); }

ordered_json TwoModuleModel::to_json() const {
  ordered_json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["architecture"] = model::to_json(arch_);
  ordered_json params = ordered_json::array();
  for (std::size_t l = 0; l < input_layers_.size(); ++l) {
    params.push_back(tensor_json("input." + std::to_string(l) + ".weight", input_layers_[l].weight));
    params.push_back(tensor_json("input." + std::to_string(l) + ".bias", input_layers_[l].bias));
  }
  params.push_back(tensor_json("output.weight", output_.weight));
  params.push_back(tensor_json("output.bias", output_.bias));
  j["parameters"] = std::move(params);
  return j;
}

TwoModuleModel TwoModuleModel::from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != kFormat) throw ConfigError("checkpoint: not a kermod-checkpoint document");
  if (j.value("version", 0) != kVersion) throw ConfigError("checkpoint: unsupported version");
  TwoModuleModel m = create(architecture_from_json(require_key(j, "architecture", "checkpoint")), 0);
  const json& params = require_key(j, "parameters", "checkpoint");
  std::vector<std::pair<std::string, ad::Tensor>> slots;
  for (std::size_t l = 0; l < m.input_layers_.size(); ++l) {
    slots.emplace_back("input." + std::to_string(l) + ".weight", m.input_layers_[l].weight);
    slots.emplace_back("input." + std::to_string(l) + ".bias", m.input_layers_[l].bias);
  }
  slots.emplace_back("output.weight", m.output_.weight);
  slots.emplace_back("output.bias", m.output_.bias);
  if (!params.is_array() || params.size() != slots.size()) {
    throw ConfigError("checkpoint: expected " + std::to_string(slots.size()) + " parameter entries");
  }
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const json& p = params[i];
    auto& [name, tensor] = slots[i];
    if (require_key(p, "name", "checkpoint parameter").get<std::string>() != name) {
      throw ConfigError("checkpoint: parameter " + std::to_string(i) + " should be '" + name + "'");
    }
    if (require_key(p, "shape", name).get<ad::Shape>() != tensor.shape()) {
      throw DimensionError("checkpoint: '" + name + "' shape does not match the architecture");
    }
    const auto values = require_key(p, "values", name).get<std::vector<double>>();
    if (values.size() != tensor.size()) throw DimensionError("checkpoint: '" + name + "' has the wrong value count");
    std::copy(values.begin(), values.end(), tensor.mutable_data().begin());
  }
  return m;
}

void TwoModuleModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write checkpoint '" + path + "'");
  out << to_json().dump() << '\n';
}

TwoModuleModel TwoModuleModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("checkpoint '" + path + "': " + e.what());
  }
  return from_json(j);
}

double accuracy(std::span<const int> predicted, std::span<const int> labels) {
  if (predicted.size() != labels.size()) throw DimensionError("accuracy: length mismatch");
  if (labels.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predicted[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

std::vector<double> per_class_recall(std::span<const int> predicted, std::span<const int> labels,
                                     std::size_t num_classes) {
  if (predicted.size() != labels.size()) throw DimensionError("per_class_recall: length mismatch");
  std::vector<double> hits(num_classes, 0.0), totals(num_classes, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto y = static_cast<std::size_t>(labels[i]);
    if (y >= num_classes) throw ContractError("per_class_recall: label out of range");
    totals[y] += 1.0;
    if (predicted[i] == labels[i]) hits[y] += 1.0;
  }
  for (std::size_t c = 0; c < num_classes; ++c) hits[c] = totals[c] > 0.0 ? hits[c] / totals[c] : 0.0;
  return hits;
}

}  // namespace kermod::model
