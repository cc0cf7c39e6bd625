// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0
//
// Proxy objectives for training an input module from pairwise supervision.
// Every objective is maximized and depends on the batch only through kernel
// values k_ij and whether y_i == y_j.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kermod/autodiff.hpp"
#include "kermod/matrix.hpp"

namespace kermod::proxy {

using IndexPair = std::pair<std::size_t, std::size_t>;

/// Ordered index pairs of a labeled batch, enumerated row-major.
struct PairPartition {
  std::size_t batch_size = 0;
  std::vector<IndexPair> negatives;  // y_i != y_j
  std::vector<IndexPair> positives;  // i != j, y_i == y_j
};

PairPartition partition_pairs(std::span<const int> labels);

/// k*_ij = alpha on positives and the diagonal, beta elsewhere.
Matrix target_matrix(std::span<const int> labels, double alpha, double beta);

enum class ProxyKind { al_neo, cts_neo, nmse_neo, al, utal, cts, nmse };

/// Accepts the CLI/config names: al-neo, cts-neo, nmse-neo, al, utal, cts, nmse.
ProxyKind parse_proxy(std::string_view name);
std::string to_string(ProxyKind kind);
/// True for the negative-only variants, which need beta != 0.
bool is_negative_only(ProxyKind kind);

double al_neo(const Matrix& k, const PairPartition& part, double beta);
double cts_neo(const Matrix& k, const PairPartition& part);
double nmse_neo(const Matrix& k, const PairPartition& part, double beta);
double alignment(const Matrix& k, const Matrix& target);
double utal(const Matrix& k, const Matrix& target);
double cts(const Matrix& k, const PairPartition& part);
double nmse(const Matrix& k, const Matrix& target);

struct ProxyValue {
  double value = 0.0;
  Matrix grad;  // d value / d K, K's entries taken as independent
};

/// Evaluates the chosen proxy with its analytic gradient. Throws
/// UndefinedProxyError for a negative-only proxy with beta == 0 and
/// DegenerateBatchError when the batch lacks a needed pair type.
ProxyValue evaluate(ProxyKind kind, const Matrix& k, std::span<const int> labels, double alpha, double beta);

/// Differentiable proxy value of an n-by-n kernel matrix tensor.
ad::Tensor objective(ProxyKind kind, const ad::Tensor& k, std::span<const int> labels, double alpha, double beta);

/// Throws UndefinedProxyError when `kind` cannot be used with this beta.
void require_defined(ProxyKind kind, double beta);

}  // namespace kermod::proxy
