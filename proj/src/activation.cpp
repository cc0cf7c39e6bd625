// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0

#include "kermod/activation.hpp"

#include <cmath>

#include "kermod/errors.hpp"

namespace kermod {

double activate(Activation kind, double x) {
  switch (kind) {
    case Activation::relu:
      return x > 0.0 ? x : 0.0;
    case Activation::tanh:
      return std::tanh(x);
    case Activation::sigmoid:
      return 1.0 / (1.0 + std::exp(-x));
  }
  throw ConfigError("unsupported activation");
}

double activate_derivative(Activation kind, double x) {
  switch (kind) {
    case Activation::relu:
      return x > 0.0 ? 1.0 : 0.0;
    case Activation::tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-x));
      return s * (1.0 - s);
    }
  }
  throw ConfigError("unsupported activation");
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  throw ConfigError("unknown nonlinearity '" + std::string(name) + "' (expected relu, tanh or sigmoid)");
}

std::string to_string(Activation kind) {
  switch (kind) {
    case Activation::relu:
      return "relu";
    case Activation::tanh:
      return "tanh";
    case Activation::sigmoid:
      return "sigmoid";
  }
  return "unknown";
}

}  // namespace kermod
