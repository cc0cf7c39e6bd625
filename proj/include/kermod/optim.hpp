// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "kermod/autodiff.hpp"

namespace kermod::ad {

/// Heavy-ball SGD state: v <- momentum * v + grad; p <- p - lr * v.
struct SgdMomentumState {
  double momentum = 0.9;
  double learning_rate = 0.1;
  /// Rescale the gradient to this global L2 norm when it is larger; 0 disables.
  double clip_norm = 0.0;
  std::vector<std::vector<double>> velocity;

  /// Zero velocities shaped like `params`. momentum must lie in [0, 1) and
  /// learning_rate must be positive.
  static SgdMomentumState init(const std::vector<Tensor>& params, double momentum, double learning_rate);
};

/// One update using each parameter's accumulated grad.
void sgd_step(std::vector<Tensor>& params, SgdMomentumState& state);

void zero_grads(std::vector<Tensor>& params);

}  // namespace kermod::ad
