// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0
//
// Binary empirical risks of the form
//   (1/n) sum_{I+} l+(t_i) + (1/n) sum_{I-} l-(t_j) + lambda * g(||w||)
// with l+ nonincreasing and l-, g nondecreasing, plus the multiclass
// softmax cross-entropy used to train output modules.

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kermod/autodiff.hpp"
#include "kermod/matrix.hpp"

namespace kermod::loss {

using ScalarFn = std::function<double(double)>;

struct DecomposableLoss {
  ScalarFn ell_plus;
  ScalarFn ell_minus;
  ScalarFn g;
  double lambda = 0.0;
  // Derivatives used by the differentiable risk. Empty for hand-built losses.
  ScalarFn ell_plus_derivative;
  ScalarFn ell_minus_derivative;
};

enum class LossKind { xe2, tanh_mse, hinge, xe };

/// Accepts the config names: xe2, tanh-mse, hinge, xe.
LossKind parse_loss(std::string_view name);
std::string to_string(LossKind kind);

/// Builds one of the binary decompositions. `g` defaults to the identity.
/// Throws ConfigError for the multiclass kind xe, which has no binary
/// decomposition here.
DecomposableLoss make_loss(LossKind kind, double lambda = 0.0, ScalarFn g = {});

/// Binary view of a labeled set: which examples are positive.
struct LabeledSet {
  Matrix inputs;
  std::vector<int> labels;
  std::vector<std::size_t> positives;  // I+
  std::vector<std::size_t> negatives;  // I-

  /// Label `positive_class` forms I+, every other label forms I-.
  static LabeledSet binary_view(Matrix inputs, std::vector<int> labels, int positive_class);
};

double risk(const DecomposableLoss& loss, std::span<const double> scores, const LabeledSet& set, double w_norm);

/// Differentiable risk data term (lambda part excluded) for n-by-1 scores.
ad::Tensor risk_objective(const DecomposableLoss& loss, const ad::Tensor& scores,
                          std::span<const std::size_t> positives, std::span<const std::size_t> negatives);

/// Mean softmax cross-entropy of n-by-C logits; C must be at least 2.
double multiclass_xe(const Matrix& logits, std::span<const int> labels);

struct MonotonicityViolation {
  std::string function;  // "ell_plus", "ell_minus" or "g"
  double t_low;
  double t_high;
  double value_low;
  double value_high;
};

struct MonotonicityReport {
  std::size_t intervals_checked = 0;
  std::vector<MonotonicityViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks l+(t1) >= l+(t2) and l-(t1) <= l-(t2) on consecutive grid points
/// with 1e-12 slack, and g nondecreasing on the nonnegative part of the grid.
/// The grid must be ascending with at least two points.
MonotonicityReport monotonicity_audit(const DecomposableLoss& loss, std::span<const double> grid);

}  // namespace kermod::loss
