#pragma once

#include <stdexcept>
#include <string>

namespace alr {

/// Malformed or unusable input data (bad CSV cell, non-finite value, ...).
/// The message carries the location when one is known.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user-facing configuration: strategy/solver strings, experiment
/// settings, missing focus task.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace alr
