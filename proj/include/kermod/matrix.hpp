// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kermod {

/// Dense row-major matrix of doubles. Plain value type used by the pure
/// (non-differentiable) parts of the library.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), values(r * c, fill) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> v);

  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }

  std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
  std::span<double> row(std::size_t i) { return {values.data() + i * cols, cols}; }

  bool operator==(const Matrix&) const = default;
};

/// Rows of `m` selected by `indices`, in that order.
Matrix select_rows(const Matrix& m, std::span<const std::size_t> indices);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

}  // namespace kermod
