// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

namespace kermod {

enum class Activation { relu, tanh, sigmoid };

double activate(Activation kind, double x);

/// Derivative of `activate(kind, .)` at x. relu'(0) is 0.
double activate_derivative(Activation kind, double x);

/// Parses "relu", "tanh" or "sigmoid"; throws ConfigError otherwise.
Activation parse_activation(std::string_view name);
std::string to_string(Activation kind);

}  // namespace kermod
