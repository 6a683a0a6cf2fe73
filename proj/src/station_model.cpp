#include "crowd_assim/station_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "crowd_assim/errors.hpp"

namespace crowd_assim {

namespace {

template <std::size_t N>
void validate_doors(const std::array<Door, N>& doors, double height, const char* what) {
  for (std::size_t i = 0; i < N; ++i) {
    const Door& d = doors[i];
    if (!(d.half_width > 0.0) || d.centre - d.half_width <= 0.0 ||
        d.centre + d.half_width >= height) {
      throw ConfigError(std::string(what) + " " + std::to_string(i) +
                        " does not lie strictly inside the wall");
    }
    for (std::size_t j = 0; j < i; ++j) {
      const Door& o = doors[j];
      if (std::abs(d.centre - o.centre) < d.half_width + o.half_width) {
        throw ConfigError(std::string(what) + "s " + std::to_string(j) + " and " +
                          std::to_string(i) + " overlap");
      }
    }
  }
}

double distance_sq(Point a, Point b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// True when `p` is closer than the separation distance to any active agent
// other than `self`.
bool blocked(const ModelState& state, std::size_t self, Point p, double sep_sq) {
  const auto& agents = state.agents;
  for (std::size_t j = 0; j < agents.size(); ++j) {
    if (j == self || agents[j].status != AgentStatus::kActive) continue;
    if (distance_sq(agents[j].position, p) < sep_sq) return true;
  }
  return false;
}

bool at_exit(const EnvironmentGeometry& g, const Door& exit, Point p, double separation) {
  return p.x >= g.width - separation && std::abs(p.y - exit.centre) <= exit.half_width;
}

}  // namespace

void EnvironmentGeometry::validate() const {
  if (!(width > 0.0) || !(height > 0.0)) {
    throw ConfigError("environment width and height must be positive");
  }
  if (entrance_capacity < 1) throw ConfigError("entrance_capacity must be at least 1");
  validate_doors(entrances, height, "entrance");
  validate_doors(exits, height, "exit");
}

void ModelConfig::validate() const {
  if (n_agents == 0) throw ConfigError("agents must be at least 1");
  geometry.validate();
  if (!(speed_min > 0.0) || speed_max < speed_min) {
    throw ConfigError("speeds must satisfy 0 < speed_min <= speed_max");
  }
  if (gate_interval < 0) throw ConfigError("gate_interval must be non-negative");
  if (!(separation > 0.0)) throw ConfigError("separation must be positive");
  if (iteration_cap < 1) throw ConfigError("iteration_cap must be at least 1");
}

Point clamp_to(const EnvironmentGeometry& g, Point p) {
  return {std::clamp(p.x, 0.0, g.width), std::clamp(p.y, 0.0, g.height)};
}

Point ModelState::reported_position(std::size_t agent) const {
  const AgentState& a = agents.at(agent);
  const AgentParams& p = (*params)[agent];
  switch (a.status) {
    case AgentStatus::kUnstarted:
      return geometry().entrance_centre(p.entrance_index);
    case AgentStatus::kFinished:
      return geometry().exit_centre(p.exit_index);
    case AgentStatus::kActive:
      break;
  }
  return a.position;
}

std::size_t ModelState::count(AgentStatus status) const {
  return static_cast<std::size_t>(std::count_if(
      agents.begin(), agents.end(), [status](const AgentState& a) { return a.status == status; }));
}

ModelState build_model(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng = make_rng(derive_seed(seed, {key(Stream::kAgentParams)}));
  std::uniform_real_distribution<double> speed(config.speed_min, config.speed_max);
  std::uniform_int_distribution<int> exit_choice(0, 1);

  auto params = std::make_shared<std::vector<AgentParams>>(config.n_agents);
  for (std::size_t id = 0; id < config.n_agents; ++id) {
    AgentParams& p = (*params)[id];
    p.id = id;
    p.entrance_index = static_cast<int>(id % 3);
    p.entry_time = static_cast<std::int64_t>(id / 3) * config.gate_interval;
    p.max_speed = speed(rng);
    p.exit_index = exit_choice(rng);
  }

  ModelState state;
  state.config = std::make_shared<const ModelConfig>(config);
  state.params = std::move(params);
  state.agents.resize(config.n_agents);
  for (std::size_t id = 0; id < config.n_agents; ++id) {
    state.agents[id].position = state.geometry().entrance_centre((*state.params)[id].entrance_index);
  }
  return state;
}

// Agents act in ascending id order. An active agent tries to move toward its
// exit centre at full, two-thirds and one-third of its maximum speed; if all
// three are blocked it sidesteps perpendicular to its heading, choosing the
// side with a fair coin. A sidestep that would itself collide is abandoned.
void step(ModelState& state, Rng& rng) {
  const ModelConfig& cfg = *state.config;
  const EnvironmentGeometry& g = cfg.geometry;
  const auto& params = *state.params;
  const double sep = cfg.separation;
  const double sep_sq = sep * sep;
  const std::int64_t now = state.iteration;

  std::array<int, 3> admitted{};
  std::bernoulli_distribution coin(0.5);
  constexpr std::array<double, 3> kSpeedFractions{1.0, 2.0 / 3.0, 1.0 / 3.0};

  for (std::size_t i = 0; i < state.agents.size(); ++i) {
    AgentState& agent = state.agents[i];
    const AgentParams& p = params[i];

    if (agent.status == AgentStatus::kUnstarted) {
      if (p.entry_time > now || admitted[p.entrance_index] >= g.entrance_capacity) continue;
      const Point door = g.entrance_centre(p.entrance_index);
      if (blocked(state, i, door, sep_sq)) continue;
      agent.position = door;
      agent.status = AgentStatus::kActive;
      ++admitted[p.entrance_index];
      continue;
    }
    if (agent.status != AgentStatus::kActive) continue;

    const Door& exit = g.exits[p.exit_index];
    const Point target = g.exit_centre(p.exit_index);
    const double dx = target.x - agent.position.x;
    const double dy = target.y - agent.position.y;
    const double dist = std::hypot(dx, dy);

    if (dist > 0.0) {
      const double hx = dx / dist;
      const double hy = dy / dist;
      bool moved = false;
      for (double fraction : kSpeedFractions) {
        const double len = std::min(fraction * p.max_speed, dist);
        const Point proposal =
            clamp_to(g, {agent.position.x + hx * len, agent.position.y + hy * len});
        if (!blocked(state, i, proposal, sep_sq)) {
          agent.position = proposal;
          moved = true;
          break;
        }
        if (fraction == 1.0) ++state.collision_count;
      }
      if (!moved) {
        const double side = coin(rng) ? 1.0 : -1.0;
        const Point proposal = clamp_to(
            g, {agent.position.x - side * hy * sep, agent.position.y + side * hx * sep});
        if (!blocked(state, i, proposal, sep_sq)) agent.position = proposal;
      }
    }

    if (at_exit(g, exit, agent.position, sep)) agent.status = AgentStatus::kFinished;
  }
  state.iteration = now + 1;
}

bool is_done(const ModelState& state) {
  return std::all_of(state.agents.begin(), state.agents.end(),
                     [](const AgentState& a) { return a.status == AgentStatus::kFinished; });
}

PartialState partial_state(const ModelState& state) {
  PartialState out;
  out.reserve(2 * state.n_agents());
  for (std::size_t i = 0; i < state.n_agents(); ++i) {
    const Point p = state.reported_position(i);
    out.push_back(p.x);
    out.push_back(p.y);
  }
  return out;
}

void set_partial_state(ModelState& state, std::span<const double> values) {
  if (values.size() != 2 * state.n_agents()) {
    throw DimensionError("partial state has length " + std::to_string(values.size()) +
                         ", expected " + std::to_string(2 * state.n_agents()));
  }
  for (std::size_t i = 0; i < state.n_agents(); ++i) {
    AgentState& a = state.agents[i];
    if (a.status != AgentStatus::kActive) continue;
    a.position = clamp_to(state.geometry(), {values[2 * i], values[2 * i + 1]});
  }
}

}  // namespace crowd_assim
