// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0

#include "kermod/kernel.hpp"

#include <algorithm>
#include <string>

#include "kermod/errors.hpp"

namespace kermod::kernel {

std::vector<double> FeatureMap::apply(std::span<const double> u) const {
  std::vector<double> out(u.size());
  std::transform(u.begin(), u.end(), out.begin(), [this](double x) { return activate(nonlinearity, x); });
  if (normalize) {
    const double denom = std::max(norm(out), epsilon);
    for (double& v : out) v /= denom;
  }
  return out;
}

ad::Tensor FeatureMap::apply(const ad::Tensor& activations) const {
  ad::Tensor phi = ad::elementwise(activations, nonlinearity);
  return normalize ? ad::unit_normalize(phi, epsilon) : phi;
}

Matrix FeatureMap::apply_rows(const Matrix& activations) const {
  Matrix out(activations.rows, activations.cols);
  for (std::size_t i = 0; i < activations.rows; ++i) {
    const auto f = apply(activations.row(i));
    std::copy(f.begin(), f.end(), out.row(i).begin());
  }
  return out;
}

KernelBounds kernel_bounds(Activation nonlinearity) {
  switch (nonlinearity) {
    case Activation::relu:
    case Activation::sigmoid:
      return {1.0, 0.0};
    case Activation::tanh:
      return {1.0, -1.0};
  }
  throw ConfigError("kernel_bounds: unsupported nonlinearity");
}

KernelSpec KernelSpec::for_nonlinearity(Activation nonlinearity, double epsilon) {
  const auto bounds = kernel_bounds(nonlinearity);
  return KernelSpec{FeatureMap{nonlinearity, true, epsilon}, bounds.alpha, bounds.beta};
}

double kernel_eval(const KernelSpec& spec, std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw DimensionError("kernel_eval: dimensions " + std::to_string(u.size()) + " and " + std::to_string(v.size()));
  }
  return dot(spec.feature_map.apply(u), spec.feature_map.apply(v));
}

Matrix kernel_matrix(const KernelSpec& spec, const Matrix& x) {
  const Matrix features = spec.feature_map.apply_rows(x);
  Matrix k(x.rows, x.rows);
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t j = i; j < x.rows; ++j) {
      const double v = dot(features.row(i), features.row(j));
      k(i, j) = v;
      k(j, i) = v;
    }
  return k;
}

double rkhs_distance_sq(const KernelSpec& spec, std::span<const double> u, std::span<const double> v) {
  return kernel_eval(spec, u, u) + kernel_eval(spec, v, v) - 2.0 * kernel_eval(spec, u, v);
}

std::vector<double> conv_patch_feature(Activation nonlinearity, const Image& x, const ConvPatchSpec& patch) {
  if (x.values.size() != x.height * x.width * x.channels) throw DimensionError("conv_patch_feature: image size mismatch");
  if (patch.height == 0 || patch.width == 0) throw ContractError("conv_patch_feature: empty patch");
  if (patch.row >= x.height || patch.col >= x.width) throw ContractError("conv_patch_feature: center outside image");
  // Offsets of the patch's top-left corner relative to the center.
  const auto up = static_cast<long>((patch.height - 1) / 2);
  const auto left = static_cast<long>((patch.width - 1) / 2);
  const long top = static_cast<long>(patch.row) - up;
  const long first = static_cast<long>(patch.col) - left;
  const long bottom = top + static_cast<long>(patch.height);
  const long last = first + static_cast<long>(patch.width);
  const bool inside = top >= 0 && first >= 0 && bottom <= static_cast<long>(x.height) &&
                      last <= static_cast<long>(x.width);
  if (!inside && patch.padding == Padding::none) {
    throw ContractError("conv_patch_feature: " + std::to_string(patch.height) + "x" + std::to_string(patch.width) +
                        " patch at (" + std::to_string(patch.row) + ", " + std::to_string(patch.col) +
                        ") leaves the image and padding is disabled");
  }
  std::vector<double> out;
  out.reserve(patch.height * patch.width * x.channels);
  for (std::size_t c = 0; c < x.channels; ++c)
    for (long i = top; i < bottom; ++i)
      for (long j = first; j < last; ++j) {
        const bool valid = i >= 0 && j >= 0 && i < static_cast<long>(x.height) && j < static_cast<long>(x.width);
        // Zero padding pads the activated tensor, so padded entries stay 0.
        out.push_back(valid ? activate(nonlinearity, x.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j), c))
                            : 0.0);
      }
  return out;
}

}  // namespace kermod::kernel
