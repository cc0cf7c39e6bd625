// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0

#include "kermod/matrix.hpp"

#include <cmath>
#include <string>

#include "kermod/errors.hpp"

namespace kermod {

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> v) : rows(r), cols(c), values(std::move(v)) {
  if (values.size() != rows * cols) {
    throw DimensionError("matrix: " + std::to_string(rows) + "x" + std::to_string(cols) + " needs " +
                         std::to_string(rows * cols) + " values, got " + std::to_string(values.size()));
  }
}

Matrix select_rows(const Matrix& m, std::span<const std::size_t> indices) {
  Matrix out(indices.size(), m.cols);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= m.rows) throw DimensionError("select_rows: index out of range");
    const auto src = m.row(indices[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("dot: lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace kermod
