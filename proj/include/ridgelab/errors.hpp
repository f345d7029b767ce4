#pragma once

#include <stdexcept>
#include <string>

namespace ridgelab {

/// Raised when an operation is asked for something the activation kind cannot provide.
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A configuration or input file failed validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ridgelab
