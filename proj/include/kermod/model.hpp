// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0
//
// Two-module network F2(psi(F1(x))): an MLP input module F1 ending in
// pre-nonlinearity activations, a normalized link feature map psi, and an
// affine output module F2.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "kermod/activation.hpp"
#include "kermod/autodiff.hpp"
#include "kermod/kernel.hpp"
#include "kermod/matrix.hpp"

namespace kermod::model {

struct Architecture {
  /// d0 -> h1 -> ... -> d1. The hidden activation follows every layer but
  /// the last one, so F1 ends in pre-link activations.
  std::vector<std::size_t> input_widths = {32, 512, 2};
  Activation hidden_activation = Activation::relu;
  Activation link = Activation::tanh;
  bool normalize_link = true;
  double epsilon = 1e-12;
  /// Number of output scores. 1 means a single binary score whose sign
  /// predicts label 1.
  std::size_t outputs = 10;

  /// Throws ConfigError on fewer than two widths, a zero width or zero outputs.
  void validate() const;
  std::size_t input_dim() const { return input_widths.front(); }
  std::size_t feature_dim() const { return input_widths.back(); }
  bool operator==(const Architecture&) const = default;
};

nlohmann::ordered_json to_json(const Architecture& arch);
Architecture architecture_from_json(const nlohmann::json& j);

class TwoModuleModel {
 public:
  TwoModuleModel() = default;

  /// Weights and biases drawn from uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  static TwoModuleModel create(const Architecture& arch, std::uint64_t seed);

  const Architecture& architecture() const { return arch_; }
  kernel::FeatureMap link() const;
  /// Kernel of the link map with its bounds. Requires normalize_link.
  kernel::KernelSpec kernel_spec() const;

  ad::Tensor input_forward(const ad::Tensor& x) const;
  ad::Tensor features(const ad::Tensor& x) const;
  ad::Tensor output_forward(const ad::Tensor& features) const;
  ad::Tensor forward(const ad::Tensor& x) const;

  /// Graph-free evaluation helpers.
  Matrix pre_link(const Matrix& x) const;
  Matrix embed(const Matrix& x) const;
  Matrix scores_from_features(const Matrix& features) const;
  Matrix scores(const Matrix& x) const;
  std::vector<int> predict_from_scores(const Matrix& scores) const;
  std::vector<int> predict(const Matrix& x) const;

  std::vector<ad::Tensor> input_parameters() const;
  std::vector<ad::Tensor> output_parameters() const;
  std::vector<ad::Tensor> parameters() const;

  /// Deep copy: the clone shares no parameter storage with this model.
  TwoModuleModel clone() const;
  /// Redraws F2 from `seed`, leaving F1 untouched.
  void reset_output(std::uint64_t seed);

  /// {"format": "kermod-checkpoint", "version": 1, "architecture": ...,
  ///  "parameters": [{"name", "shape", "values"}]}
  nlohmann::ordered_json to_json() const;
  static TwoModuleModel from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static TwoModuleModel load(const std::string& path);

 private:
  struct Layer {
    ad::Tensor weight;  // fan_in x fan_out
    ad::Tensor bias;
  };
  static Layer make_layer(std::size_t fan_in, std::size_t fan_out, std::uint64_t seed);

  Architecture arch_;
  std::vector<Layer> input_layers_;
  Layer output_;
};

double accuracy(std::span<const int> predicted, std::span<const int> labels);
/// Fraction of each class's examples predicted correctly (NaN-free: a class
/// with no examples gets recall 0).
std::vector<double> per_class_recall(std::span<const int> predicted, std::span<const int> labels,
                                     std::size_t num_classes);

}  // namespace kermod::model
