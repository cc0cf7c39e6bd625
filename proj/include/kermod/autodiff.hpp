// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal reverse-mode automatic differentiation over dense double tensors.
//
// A Tensor is a shared handle to a graph node. Operations record their inputs
// and a backward rule on the output node; backward() orders the reachable
// nodes topologically and runs the rules in reverse. Leaf gradients
// accumulate across backward() calls and must be cleared with zero_grad().

#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "kermod/activation.hpp"
#include "kermod/matrix.hpp"

namespace kermod::ad {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);

namespace detail {
struct Node;
struct Access;
}  // namespace detail

class Tensor {
 public:
  Tensor() = default;

  /// Leaf without gradient tracking.
  static Tensor constant(Shape shape, std::vector<double> data);
  /// Leaf whose gradient is accumulated by backward().
  static Tensor parameter(Shape shape, std::vector<double> data);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor from_matrix(const Matrix& m, bool requires_grad = false);

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t size() const;
  std::size_t dim(std::size_t axis) const;

  std::span<const double> data() const;
  /// Write access to the values. Only meaningful for leaves (parameters).
  std::span<double> mutable_data();

  bool requires_grad() const;
  bool is_leaf() const;
  /// Gradient accumulator; empty span when requires_grad() is false.
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  double item() const;
  Matrix to_matrix() const;

  /// New constant leaf holding a copy of the values, cut from the graph.
  Tensor detach() const;

  /// Identity of the underlying node.
  const detail::Node* id() const noexcept { return node_.get(); }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;

  friend struct detail::Access;
};

/// out[i,j] = sum_k x[i,k] W[k,j] + b[j]
Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b);
Tensor matmul(const Tensor& a, const Tensor& b);
/// x x^T for an n-by-d input.
Tensor gram(const Tensor& x);
Tensor elementwise(const Tensor& x, Activation kind);
/// Divides each row by max(||row||, epsilon).
Tensor unit_normalize(const Tensor& x, double epsilon);
Tensor sum(const Tensor& x);
Tensor add(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
/// Mean softmax cross-entropy of n-by-C logits against class indices.
Tensor softmax_cross_entropy(const Tensor& logits, std::span<const int> labels);
/// Scalar node with a precomputed value and gradient with respect to `x`.
Tensor scalar_objective(const Tensor& x, double value, std::vector<double> grad_wrt_x);

/// Runs reverse-mode differentiation from a scalar tensor.
void backward(const Tensor& loss);

}  // namespace kermod::ad
