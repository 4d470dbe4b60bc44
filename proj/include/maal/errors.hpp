#pragma once

#include <stdexcept>
#include <string>

namespace maal {

/// Invalid sizes, empty sets, bad weights or any other caller-side misconfiguration.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// A value went non-finite where the math requires finite numbers.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Operation not allowed in the current lifecycle state (e.g. stepping a finished episode).
class StateError : public std::logic_error {
 public:
  explicit StateError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace maal
