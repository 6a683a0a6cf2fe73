#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "crowd_assim/seeding.hpp"

namespace crowd_assim {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// A door on the left (entrance) or right (exit) wall, given by the
/// y coordinate of its centre and its half-width.
struct Door {
  double centre = 0.0;
  double half_width = 0.0;
};

/// Rectangular concourse with three entrances on the left wall and two
/// exits on the right wall. Doubles as the model's global parameters,
/// which are held constant.
struct EnvironmentGeometry {
  double width = 400.0;
  double height = 200.0;
  std::array<Door, 3> entrances{{{50.0, 4.0}, {100.0, 4.0}, {150.0, 4.0}}};
  std::array<Door, 2> exits{{{200.0 / 3.0, 8.0}, {400.0 / 3.0, 8.0}}};
  int entrance_capacity = 2;

  Point entrance_centre(int index) const { return {0.0, entrances.at(index).centre}; }
  Point exit_centre(int index) const { return {width, exits.at(index).centre}; }

  /// Throws ConfigError when dimensions are non-positive or doors overlap or
  /// leave the wall.
  void validate() const;
};

struct ModelConfig {
  std::size_t n_agents = 10;
  EnvironmentGeometry geometry;
  double speed_min = 0.5;
  double speed_max = 2.0;
  /// Iterations between consecutive releases from the same entrance.
  int gate_interval = 10;
  /// Minimum distance between two active agents.
  double separation = 2.0;
  /// Hard stop for any run, truth or particle.
  std::int64_t iteration_cap = 3000;

  void validate() const;
};

enum class AgentStatus : std::uint8_t { kUnstarted, kActive, kFinished };

/// Fixed per-agent parameters. Shared read-only between the truth model
/// and every particle; never estimated.
struct AgentParams {
  std::size_t id = 0;
  std::int64_t entry_time = 0;
  int entrance_index = 0;
  int exit_index = 0;
  double max_speed = 1.0;
};

struct AgentState {
  Point position;
  AgentStatus status = AgentStatus::kUnstarted;
};

using PartialState = std::vector<double>;

/// Complete state of one model instance. Copying it is cheap: the fixed
/// parameters live behind shared immutable pointers.
struct ModelState {
  std::int64_t iteration = 0;
  std::vector<AgentState> agents;
  std::shared_ptr<const std::vector<AgentParams>> params;
  std::shared_ptr<const ModelConfig> config;
  std::int64_t collision_count = 0;

  std::size_t n_agents() const { return agents.size(); }
  const EnvironmentGeometry& geometry() const { return config->geometry; }

  /// Position as seen by observers: the entrance centre before entry and
  /// the exit centre after leaving.
  Point reported_position(std::size_t agent) const;

  std::size_t count(AgentStatus status) const;
};

/// Creates a model with every agent unstarted. Agent parameters come from a
/// stream derived from `seed`: speeds uniform on [speed_min, speed_max],
/// exits uniform over both doors, entrances round-robin and entry times
/// floor(id / 3) * gate_interval.
ModelState build_model(const ModelConfig& config, std::uint64_t seed);

/// Advances one iteration. `rng` feeds the left/right sidestep choice, the
/// only stochastic event in the model.
void step(ModelState& state, Rng& rng);

bool is_done(const ModelState& state);

/// Flat [x0, y0, x1, y1, ...] of reported positions, length 2 * n_agents.
PartialState partial_state(const ModelState& state);

/// Overwrites active agents' positions, clamped to the environment.
/// Throws DimensionError when values.size() != 2 * n_agents.
void set_partial_state(ModelState& state, std::span<const double> values);

Point clamp_to(const EnvironmentGeometry& geometry, Point p);

}  // namespace crowd_assim
