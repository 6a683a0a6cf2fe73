#pragma once

#include <stdexcept>
#include <string>

namespace crowd_assim {

/// Invalid model, filter or run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector lengths that do not agree with the number of agents.
class DimensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// All particle weights vanished, so the set cannot be resampled.
class DegeneracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace crowd_assim
