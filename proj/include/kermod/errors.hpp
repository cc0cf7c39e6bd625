// Copyright 2026 The kermod Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace kermod {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes or vector lengths do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an operation's precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value, unknown name, or infeasible setting.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A proxy objective is undefined for the requested kernel bounds.
class UndefinedProxyError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// A batch lacks the pair type (or non-zero norm) an objective needs.
class DegenerateBatchError : public Error {
 public:
  using Error::Error;
};

/// Malformed dataset file. Carries the byte offset of the failure.
class IngestionError : public Error {
 public:
  IngestionError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// An internal invariant failed; indicates a bug rather than bad input.
class InternalInvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace kermod
