// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0

#include "kermod/proxy.hpp"

#include <cmath>

#include "kermod/errors.hpp"

namespace kermod::proxy {

namespace {

void require_square(const Matrix& k, std::size_t n, const char* op) {
  if (k.rows != k.cols || k.rows != n) {
    throw DimensionError(std::string(op) + ": kernel matrix is " + std::to_string(k.rows) + "x" +
                         std::to_string(k.cols) + ", batch has " + std::to_string(n) + " examples");
  }
}

void require_negatives(const PairPartition& part, const char* op) {
  if (part.negatives.empty()) throw DegenerateBatchError(std::string(op) + ": batch has no inter-class pairs");
}

double frobenius(const Matrix& m) { return norm(m.values); }

struct Sums {
  double linear = 0.0;
  double square = 0.0;
};

Sums pair_sums(const Matrix& k, const std::vector<IndexPair>& pairs) {
  Sums s;
  for (auto [i, j] : pairs) {
    s.linear += k(i, j);
    s.square += k(i, j) * k(i, j);
  }
  return s;
}

// Cosine between k and target over all entries, or over the strict upper
// triangle only; grad is nonzero on the same entries.
ProxyValue masked_cosine(const Matrix& k, const Matrix& target, bool upper_only, const char* op) {
  const std::size_t n = k.rows;
  double inner = 0.0, kk = 0.0, tt = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = upper_only ? i + 1 : 0; j < n; ++j) {
      inner += k(i, j) * target(i, j);
      kk += k(i, j) * k(i, j);
      tt += target(i, j) * target(i, j);
    }
  if (kk <= 0.0 || tt <= 0.0) throw DegenerateBatchError(std::string(op) + ": zero norm");
  const double nk = std::sqrt(kk), nt = std::sqrt(tt);
  ProxyValue out{inner / (nk * nt), Matrix(n, n)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = upper_only ? i + 1 : 0; j < n; ++j)
      out.grad(i, j) = target(i, j) / (nk * nt) - inner * k(i, j) / (kk * nk * nt);
  return out;
}

ProxyValue eval_al_neo(const Matrix& k, const PairPartition& part, double beta) {
  require_negatives(part, "al-neo");
  if (beta == 0.0) throw UndefinedProxyError("al-neo is undefined for beta = 0; use al or utal");
  const Sums s = pair_sums(k, part.negatives);
  if (s.square <= 0.0) throw DegenerateBatchError("al-neo: inter-class kernel values are all zero");
  const double m = static_cast<double>(part.negatives.size());
  const double sign = beta / std::abs(beta);
  const double root = std::sqrt(s.square);
  ProxyValue out{sign * s.linear / (m * root), Matrix(k.rows, k.cols)};
  for (auto [i, j] : part.negatives)
    out.grad(i, j) = sign / m * (1.0 / root - s.linear * k(i, j) / (s.square * root));
  return out;
}

ProxyValue eval_cts_neo(const Matrix& k, const PairPartition& part) {
  require_negatives(part, "cts-neo");
  const double m = static_cast<double>(part.negatives.size());
  ProxyValue out{0.0, Matrix(k.rows, k.cols)};
  for (auto [i, j] : part.negatives) {
    const double e = std::exp(k(i, j));
    out.value -= e / m;
    out.grad(i, j) = -e / m;
  }
  return out;
}

ProxyValue eval_nmse_neo(const Matrix& k, const PairPartition& part, double beta) {
  require_negatives(part, "nmse-neo");
  const double m = static_cast<double>(part.negatives.size());
  ProxyValue out{0.0, Matrix(k.rows, k.cols)};
  for (auto [i, j] : part.negatives) {
    const double r = k(i, j) - beta;
    out.value -= r * r / m;
    out.grad(i, j) = -2.0 * r / m;
  }
  return out;
}

ProxyValue eval_cts(const Matrix& k, const PairPartition& part) {
  if (part.negatives.empty() || part.positives.empty()) {
    throw DegenerateBatchError("cts: batch needs both intra- and inter-class pairs");
  }
  double pos = 0.0, total = 0.0;
  for (auto [i, j] : part.positives) pos += std::exp(k(i, j));
  total = pos;
  for (auto [i, j] : part.negatives) total += std::exp(k(i, j));
  ProxyValue out{pos / total, Matrix(k.rows, k.cols)};
  for (auto [i, j] : part.positives) out.grad(i, j) = std::exp(k(i, j)) * (total - pos) / (total * total);
  for (auto [i, j] : part.negatives) out.grad(i, j) = -std::exp(k(i, j)) * pos / (total * total);
  return out;
}

ProxyValue eval_nmse(const Matrix& k, const Matrix& target) {
  const std::size_t n = k.rows;
  const double n2 = static_cast<double>(n * n);
  ProxyValue out{0.0, Matrix(n, n)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double r = k(i, j) - target(i, j);
      out.value -= r * r / n2;
      out.grad(i, j) = -2.0 * r / n2;
    }
  return out;
}

}  // namespace

PairPartition partition_pairs(std::span<const int> labels) {
  PairPartition part;
  part.batch_size = labels.size();
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (i == j) continue;
      (labels[i] == labels[j] ? part.positives : part.negatives).emplace_back(i, j);
    }
  return part;
}

Matrix target_matrix(std::span<const int> labels, double alpha, double beta) {
  const std::size_t n = labels.size();
  Matrix t(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) t(i, j) = (i == j || labels[i] == labels[j]) ? alpha : beta;
  return t;
}

ProxyKind parse_proxy(std::string_view name) {
  if (name == "al-neo") return ProxyKind::al_neo;
  if (name == "cts-neo") return ProxyKind::cts_neo;
  if (name == "nmse-neo") return ProxyKind::nmse_neo;
  if (name == "al") return ProxyKind::al;
  if (name == "utal") return ProxyKind::utal;
  if (name == "cts") return ProxyKind::cts;
  if (name == "nmse") return ProxyKind::nmse;
  throw ConfigError("unknown proxy '" + std::string(name) +
                    "' (expected al-neo, cts-neo, nmse-neo, al, utal, cts or nmse)");
}

std::string to_string(ProxyKind kind) {
  switch (kind) {
    case ProxyKind::al_neo:
      return "al-neo";
    case ProxyKind::cts_neo:
      return "cts-neo";
    case ProxyKind::nmse_neo:
      return "nmse-neo";
    case ProxyKind::al:
      return "al";
    case ProxyKind::utal:
      return "utal";
    case ProxyKind::cts:
      return "cts";
    case ProxyKind::nmse:
      return "nmse";
  }
  return "unknown";
}

bool is_negative_only(ProxyKind kind) {
  return kind == ProxyKind::al_neo || kind == ProxyKind::cts_neo || kind == ProxyKind::nmse_neo;
}

void require_defined(ProxyKind kind, double beta) {
  if (is_negative_only(kind) && beta == 0.0) {
    throw UndefinedProxyError(to_string(kind) +
                              " is undefined for a kernel with beta = 0; use one of al, utal, cts, nmse");
  }
}

double al_neo(const Matrix& k, const PairPartition& part, double beta) {
  require_square(k, part.batch_size, "al-neo");
  return eval_al_neo(k, part, beta).value;
}

double cts_neo(const Matrix& k, const PairPartition& part) {
  require_square(k, part.batch_size, "cts-neo");
  return eval_cts_neo(k, part).value;
}

double nmse_neo(const Matrix& k, const PairPartition& part, double beta) {
  require_square(k, part.batch_size, "nmse-neo");
  return eval_nmse_neo(k, part, beta).value;
}

double alignment(const Matrix& k, const Matrix& target) {
  require_square(target, k.rows, "al");
  require_square(k, k.rows, "al");
  if (frobenius(k) <= 0.0 || frobenius(target) <= 0.0) throw DegenerateBatchError("al: zero Frobenius norm");
  return masked_cosine(k, target, false, "al").value;
}

double utal(const Matrix& k, const Matrix& target) {
  require_square(target, k.rows, "utal");
  require_square(k, k.rows, "utal");
  if (k.rows < 2) throw DegenerateBatchError("utal: needs at least two examples");
  return masked_cosine(k, target, true, "utal").value;
}

double cts(const Matrix& k, const PairPartition& part) {
  require_square(k, part.batch_size, "cts");
  return eval_cts(k, part).value;
}

double nmse(const Matrix& k, const Matrix& target) {
  require_square(target, k.rows, "nmse");
  require_square(k, k.rows, "nmse");
  return eval_nmse(k, target).value;
}

ProxyValue evaluate(ProxyKind kind, const Matrix& k, std::span<const int> labels, double alpha, double beta) {
  require_square(k, labels.size(), to_string(kind).c_str());
  require_defined(kind, beta);
  switch (kind) {
    case ProxyKind::al_neo:
      return eval_al_neo(k, partition_pairs(labels), beta);
    case ProxyKind::cts_neo:
      return eval_cts_neo(k, partition_pairs(labels));
    case ProxyKind::nmse_neo:
      return eval_nmse_neo(k, partition_pairs(labels), beta);
    case ProxyKind::al:
      return masked_cosine(k, target_matrix(labels, alpha, beta), false, "al");
    case ProxyKind::utal:
      if (k.rows < 2) throw DegenerateBatchError("utal: needs at least two examples");
      return masked_cosine(k, target_matrix(labels, alpha, beta), true, "utal");
    case ProxyKind::cts:
      return eval_cts(k, partition_pairs(labels));
    case ProxyKind::nmse:
      return eval_nmse(k, target_matrix(labels, alpha, beta));
  }
  throw ConfigError("unsupported proxy");
}

ad::Tensor objective(ProxyKind kind, const ad::Tensor& k, std::span<const int> labels, double alpha, double beta) {
  ProxyValue pv = evaluate(kind, k.to_matrix(), labels, alpha, beta);
  return ad::scalar_objective(k, pv.value, std::move(pv.grad.values));
}

}  // namespace kermod::proxy
