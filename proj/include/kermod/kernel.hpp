// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0
//
// Feature maps obtained by absorbing a layer's trailing nonlinearity into the
// next layer, and the kernels they induce. Kernels are always evaluated
// through the explicit features: k(u, v) = <psi(u), psi(v)>.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kermod/activation.hpp"
#include "kermod/autodiff.hpp"
#include "kermod/matrix.hpp"

namespace kermod::kernel {

/// psi(u) = phi(u) / max(||phi(u)||, epsilon) when normalize is set,
/// phi(u) otherwise, with phi applied elementwise.
struct FeatureMap {
  Activation nonlinearity = Activation::tanh;
  bool normalize = true;
  double epsilon = 1e-12;

  std::vector<double> apply(std::span<const double> u) const;
  /// Differentiable row-wise version for n-by-d activations.
  ad::Tensor apply(const ad::Tensor& activations) const;
  Matrix apply_rows(const Matrix& activations) const;
};

struct KernelBounds {
  double alpha;  // sup k
  double beta;   // inf k
};

/// Bounds of the unit-normalized kernel: (1, 0) for relu and sigmoid,
/// (1, -1) for tanh.
KernelBounds kernel_bounds(Activation nonlinearity);

struct KernelSpec {
  FeatureMap feature_map;
  double alpha = 1.0;
  double beta = -1.0;

  /// Spec for a normalized feature map with its bounds filled in.
  static KernelSpec for_nonlinearity(Activation nonlinearity, double epsilon = 1e-12);
};

double kernel_eval(const KernelSpec& spec, std::span<const double> u, std::span<const double> v);

/// M[i, j] = k(X[i], X[j]).
Matrix kernel_matrix(const KernelSpec& spec, const Matrix& x);

/// ||psi(u) - psi(v)||^2 = k(u, u) + k(v, v) - 2 k(u, v).
double rkhs_distance_sq(const KernelSpec& spec, std::span<const double> u, std::span<const double> v);

/// H x W x C activation tensor, row-major with channel fastest.
struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<double> values;

  double at(std::size_t i, std::size_t j, std::size_t c) const { return values[(i * width + j) * channels + c]; }
};

enum class Padding { none, zero };

/// h x w receptive field around (row, col). For even sizes the extra
/// row/column falls below/right of the center.
struct ConvPatchSpec {
  std::size_t height = 1;
  std::size_t width = 1;
  std::size_t row = 0;
  std::size_t col = 0;
  Padding padding = Padding::none;
};

/// Applies phi to X, then concatenates the row-major h x w patch of each
/// channel in channel order: [patch(chan 0), ..., patch(chan C-1)].
std::vector<double> conv_patch_feature(Activation nonlinearity, const Image& x, const ConvPatchSpec& patch);

}  // namespace kermod::kernel
