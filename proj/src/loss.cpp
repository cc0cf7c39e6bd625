// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0

#include "kermod/loss.hpp"

#include <algorithm>
#include <cmath>

#include "kermod/errors.hpp"

namespace kermod::loss {

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

constexpr double kMonotonicitySlack = 1e-12;

}  // namespace

LossKind parse_loss(std::string_view name) {
  if (name == "xe2") return LossKind::xe2;
  if (name == "tanh-mse") return LossKind::tanh_mse;
  if (name == "hinge") return LossKind::hinge;
  if (name == "xe") return LossKind::xe;
  throw ConfigError("unknown loss '" + std::string(name) + "' (expected xe2, tanh-mse, hinge or xe)");
}

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::xe2:
      return "xe2";
    case LossKind::tanh_mse:
      return "tanh-mse";
    case LossKind::hinge:
      return "hinge";
    case LossKind::xe:
      return "xe";
  }
  return "unknown";
}

DecomposableLoss make_loss(LossKind kind, double lambda, ScalarFn g) {
  if (lambda < 0.0) throw ConfigError("make_loss: lambda must be nonnegative");
  DecomposableLoss loss;
  loss.lambda = lambda;
  loss.g = g ? std::move(g) : ScalarFn([](double x) { return x; });
  switch (kind) {
    case LossKind::xe2:
      // ln(e^{-t} + 1) and ln(e^{t} + 1)
      loss.ell_plus = [](double t) { return softplus(-t); };
      loss.ell_minus = [](double t) { return softplus(t); };
      loss.ell_plus_derivative = [](double t) { return -logistic(-t); };
      loss.ell_minus_derivative = [](double t) { return logistic(t); };
      return loss;
    case LossKind::tanh_mse:
      loss.ell_plus = [](double t) { return (1.0 - std::tanh(t)) * (1.0 - std::tanh(t)); };
      loss.ell_minus = [](double t) { return (1.0 + std::tanh(t)) * (1.0 + std::tanh(t)); };
      loss.ell_plus_derivative = [](double t) {
        const double h = std::tanh(t);
        return -2.0 * (1.0 - h) * (1.0 - h * h);
      };
      loss.ell_minus_derivative = [](double t) {
        const double h = std::tanh(t);
        return 2.0 * (1.0 + h) * (1.0 - h * h);
      };
      return loss;
    case LossKind::hinge:
      loss.ell_plus = [](double t) { return std::max(0.0, 1.0 - t); };
      loss.ell_minus = [](double t) { return std::max(0.0, 1.0 + t); };
      loss.ell_plus_derivative = [](double t) { return t < 1.0 ? -1.0 : 0.0; };
      loss.ell_minus_derivative = [](double t) { return t > -1.0 ? 1.0 : 0.0; };
      return loss;
    case LossKind::xe:
      break;
  }
  throw ConfigError("make_loss: '" + to_string(kind) + "' has no binary decomposition (use xe2, tanh-mse or hinge)");
}

LabeledSet LabeledSet::binary_view(Matrix inputs, std::vector<int> labels, int positive_class) {
  if (inputs.rows != labels.size()) throw DimensionError("binary_view: inputs and labels disagree in length");
  LabeledSet set;
  set.inputs = std::move(inputs);
  set.labels = std::move(labels);
  for (std::size_t i = 0; i < set.labels.size(); ++i)
    (set.labels[i] == positive_class ? set.positives : set.negatives).push_back(i);
  return set;
}

double risk(const DecomposableLoss& loss, std::span<const double> scores, const LabeledSet& set, double w_norm) {
  const std::size_t n = set.positives.size() + set.negatives.size();
  if (scores.size() != n) throw DimensionError("risk: score count does not match the labeled set");
  if (n == 0) throw ContractError("risk: empty labeled set");
  double plus = 0.0, minus = 0.0;
  for (std::size_t i : set.positives) plus += loss.ell_plus(scores[i]);
  for (std::size_t j : set.negatives) minus += loss.ell_minus(scores[j]);
  const double inv_n = 1.0 / static_cast<double>(n);
  const double penalty = loss.lambda == 0.0 ? 0.0 : loss.lambda * loss.g(w_norm);
  return inv_n * plus + inv_n * minus + penalty;
}

ad::Tensor risk_objective(const DecomposableLoss& loss, const ad::Tensor& scores,
                          std::span<const std::size_t> positives, std::span<const std::size_t> negatives) {
  if (!loss.ell_plus_derivative || !loss.ell_minus_derivative) {
    throw ContractError("risk_objective: loss has no derivatives");
  }
  const std::size_t n = positives.size() + negatives.size();
  if (scores.size() != n) throw DimensionError("risk_objective: score count does not match index sets");
  const auto t = scores.data();
  const double inv_n = 1.0 / static_cast<double>(n);
  double value = 0.0;
  std::vector<double> grad(n, 0.0);
  for (std::size_t i : positives) {
    value += inv_n * loss.ell_plus(t[i]);
    grad[i] = inv_n * loss.ell_plus_derivative(t[i]);
  }
  for (std::size_t j : negatives) {
    value += inv_n * loss.ell_minus(t[j]);
    grad[j] = inv_n * loss.ell_minus_derivative(t[j]);
  }
  return ad::scalar_objective(scores, value, std::move(grad));
}

double multiclass_xe(const Matrix& logits, std::span<const int> labels) {
  if (logits.cols < 2) throw ContractError("multiclass_xe: needs at least two classes");
  if (logits.rows != labels.size()) throw DimensionError("multiclass_xe: label count does not match rows");
  if (logits.rows == 0) throw ContractError("multiclass_xe: empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < logits.rows; ++i) {
    const auto z = logits.row(i);
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= logits.cols) throw ContractError("multiclass_xe: label out of range");
    const double zmax = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - zmax);
    total += zmax + std::log(s) - z[static_cast<std::size_t>(y)];
  }
  return total / static_cast<double>(logits.rows);
}

MonotonicityReport monotonicity_audit(const DecomposableLoss& loss, std::span<const double> grid) {
  if (grid.size() < 2) throw ContractError("monotonicity_audit: grid needs at least two points");
  if (!std::is_sorted(grid.begin(), grid.end())) throw ContractError("monotonicity_audit: grid must be ascending");
  MonotonicityReport report;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double lo = grid[i], hi = grid[i + 1];
    const double p_lo = loss.ell_plus(lo), p_hi = loss.ell_plus(hi);
    const double m_lo = loss.ell_minus(lo), m_hi = loss.ell_minus(hi);
    if (p_lo < p_hi - kMonotonicitySlack) report.violations.push_back({"ell_plus", lo, hi, p_lo, p_hi});
    if (m_lo > m_hi + kMonotonicitySlack) report.violations.push_back({"ell_minus", lo, hi, m_lo, m_hi});
    // g acts on norms, so only the nonnegative part of the grid applies.
    if (loss.g && lo >= 0.0) {
      const double g_lo = loss.g(lo), g_hi = loss.g(hi);
      if (g_lo > g_hi + kMonotonicitySlack) report.violations.push_back({"g", lo, hi, g_lo, g_hi});
    }
    ++report.intervals_checked;
  }
  return report;
}

}  // namespace kermod::loss
