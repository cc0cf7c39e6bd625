// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0

#include "kermod/optim.hpp"

#include <cmath>

#include "kermod/errors.hpp"

namespace kermod::ad {

SgdMomentumState SgdMomentumState::init(const std::vector<Tensor>& params, double momentum,
                                        double learning_rate) {
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("sgd: momentum must lie in [0, 1)");
  if (!(learning_rate > 0.0)) throw ConfigError("sgd: learning rate must be positive");
  SgdMomentumState state;
  state.momentum = momentum;
  state.learning_rate = learning_rate;
  for (const auto& p : params) state.velocity.emplace_back(p.size(), 0.0);
  return state;
}

void sgd_step(std::vector<Tensor>& params, SgdMomentumState& state) {
  if (params.size() != state.velocity.size()) throw ContractError("sgd: state initialized for other parameters");
  double scale = 1.0;
  if (state.clip_norm > 0.0) {
    double sq = 0.0;
    for (const auto& p : params)
      for (double g : p.grad()) sq += g * g;
    const double norm = std::sqrt(sq);
    if (norm > state.clip_norm) scale = state.clip_norm / norm;
  }
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto& v = state.velocity[p];
    auto values = params[p].mutable_data();
    const auto g = params[p].grad();
    if (v.size() != values.size() || g.size() != values.size()) {
      throw ContractError("sgd: velocity or grad shape does not match parameter");
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = state.momentum * v[i] + scale * g[i];
      values[i] -= state.learning_rate * v[i];
    }
  }
}

void zero_grads(std::vector<Tensor>& params) {
  for (auto& p : params) p.zero_grad();
}

}  // namespace kermod::ad
