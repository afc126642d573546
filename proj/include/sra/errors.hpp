#pragma once

#include <stdexcept>
#include <string>

namespace sra {

/// Bad user input: unknown model, malformed config, invalid design.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: non-regular information, optimizer divergence,
/// derivative stencil leaving the parameter domain.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// A model-validation suite found a violated identity.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sra
