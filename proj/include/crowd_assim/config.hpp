#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crowd_assim/experiment_suite.hpp"
#include "crowd_assim/particle_filter.hpp"
#include "crowd_assim/station_model.hpp"

namespace crowd_assim {

using Setting = std::pair<std::string, std::string>;

/// Everything a run can be configured with.
struct RunConfig {
  ModelConfig model;
  FilterConfig filter;
  GridSpec grid;
  std::uint64_t seed = 0;
  /// 0 means not set; the CLI then falls back to the environment.
  unsigned threads = 0;
  bool full_grid = false;
  /// Set only when `reps` appears in the file or on the command line.
  std::optional<std::size_t> reps;
  std::vector<std::size_t> collision_agents{5, 10, 20, 30, 40};
  std::size_t collision_seeds = 10;

  /// Grid actually swept: the explicit grid lists (or the full ranges when
  /// full_grid is on), with M = reps if given, else 20 for the full grid
  /// and 5 otherwise.
  GridSpec sweep_grid() const;

  void validate() const;
};

/// Splits `key = value` lines. Blank lines and lines starting with '#' are
/// skipped. Throws ConfigError naming the line on malformed input.
std::vector<Setting> parse_settings(const std::string& text, const std::string& source);

/// Applies one setting. Throws ConfigError naming the key when it is unknown
/// or its value is malformed or out of range.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Defaults, then the file (if any), then `overrides` in order.
RunConfig load_config(const std::optional<std::string>& path, const std::vector<Setting>& overrides);

/// Canonical key/value listing of every parameter that affects results.
std::vector<Setting> config_snapshot(const RunConfig& config);

std::string weighting_name(Weighting w);
std::string roughening_name(Roughening r);

}  // namespace crowd_assim
