#include <gtest/gtest.h>

#include <cmath>

#include "crowd_assim/errors.hpp"
#include "crowd_assim/station_model.hpp"

using namespace crowd_assim;

namespace {

ModelConfig config_with(std::size_t agents) {
  ModelConfig c;
  c.n_agents = agents;
  return c;
}

void run_to_end(ModelState& s, Rng& rng) {
  while (!is_done(s) && s.iteration < s.config->iteration_cap) step(s, rng);
}

}  // namespace

TEST(StationModel, BuildAssignsRoundRobinEntrancesAndStaggeredEntry) {
  const ModelState s = build_model(config_with(7), 11);
  ASSERT_EQ(s.n_agents(), 7u);
  for (std::size_t id = 0; id < 7; ++id) {
    const AgentParams& p = (*s.params)[id];
    EXPECT_EQ(p.entrance_index, static_cast<int>(id % 3));
    EXPECT_EQ(p.entry_time, static_cast<std::int64_t>(id / 3) * 10);
    EXPECT_GE(p.max_speed, 0.5);
    EXPECT_LE(p.max_speed, 2.0);
    EXPECT_TRUE(p.exit_index == 0 || p.exit_index == 1);
    EXPECT_EQ(s.agents[id].status, AgentStatus::kUnstarted);
  }
}

TEST(StationModel, UnstartedAndFinishedReportDoorCentres) {
  ModelState s = build_model(config_with(3), 2);
  const auto& g = s.geometry();
  EXPECT_EQ(s.reported_position(1), (Point{0.0, 100.0}));
  s.agents[2].status = AgentStatus::kFinished;
  const int exit = (*s.params)[2].exit_index;
  EXPECT_EQ(s.reported_position(2), (Point{400.0, g.exits[exit].centre}));
}

TEST(StationModel, PartialStateLayout) {
  const ModelState s = build_model(config_with(2), 3);
  const PartialState v = partial_state(s);
  ASSERT_EQ(v.size(), 4u);
  EXPECT_DOUBLE_EQ(v[0], 0.0);
  EXPECT_DOUBLE_EQ(v[1], 50.0);
  EXPECT_DOUBLE_EQ(v[2], 0.0);
  EXPECT_DOUBLE_EQ(v[3], 100.0);
}

TEST(StationModel, SetPartialStateClampsAndChecksLength) {
  ModelState s = build_model(config_with(1), 4);
  s.agents[0].status = AgentStatus::kActive;
  const std::vector<double> v{-5.0, 300.0};
  set_partial_state(s, v);
  EXPECT_EQ(s.agents[0].position, (Point{0.0, 200.0}));
  const std::vector<double> wrong{1.0, 2.0, 3.0};
  EXPECT_THROW(set_partial_state(s, wrong), DimensionError);
}

TEST(StationModel, ClampToBounds) {
  const EnvironmentGeometry g;
  EXPECT_EQ(clamp_to(g, {-5.0, 300.0}), (Point{0.0, 200.0}));
  EXPECT_EQ(clamp_to(g, {401.0, -1.0}), (Point{400.0, 0.0}));
  EXPECT_EQ(clamp_to(g, {10.0, 20.0}), (Point{10.0, 20.0}));
}

TEST(StationModel, SingleAgentWalksStraightToExitWithoutCollisions) {
  ModelState s = build_model(config_with(1), 5);
  Rng rng = make_rng(1);
  const AgentParams p = (*s.params)[0];
  step(s, rng);
  ASSERT_EQ(s.agents[0].status, AgentStatus::kActive);
  step(s, rng);
  const Point target = s.geometry().exit_centre(p.exit_index);
  const double start_dist = std::hypot(target.x, target.y - 50.0);
  const Point now = s.agents[0].position;
  EXPECT_NEAR(std::hypot(target.x - now.x, target.y - now.y), start_dist - p.max_speed, 1e-9);
  run_to_end(s, rng);
  EXPECT_TRUE(is_done(s));
  EXPECT_EQ(s.collision_count, 0);
}

TEST(StationModel, ActiveAgentsKeepSeparation) {
  ModelState s = build_model(config_with(30), 6);
  Rng rng = make_rng(6);
  for (int t = 0; t < 400 && !is_done(s); ++t) {
    step(s, rng);
    for (std::size_t i = 0; i < s.n_agents(); ++i) {
      for (std::size_t j = i + 1; j < s.n_agents(); ++j) {
        if (s.agents[i].status != AgentStatus::kActive || s.agents[j].status != AgentStatus::kActive) {
          continue;
        }
        const double d = std::hypot(s.agents[i].position.x - s.agents[j].position.x,
                                    s.agents[i].position.y - s.agents[j].position.y);
        ASSERT_GE(d, 2.0 - 1e-9) << "agents " << i << "," << j << " at t=" << t;
      }
    }
  }
}

TEST(StationModel, AgentCountIsConserved) {
  ModelState s = build_model(config_with(20), 7);
  Rng rng = make_rng(7);
  std::size_t finished = 0;
  for (int t = 0; t < 3000 && !is_done(s); ++t) {
    step(s, rng);
    const std::size_t total = s.count(AgentStatus::kUnstarted) + s.count(AgentStatus::kActive) +
                              s.count(AgentStatus::kFinished);
    ASSERT_EQ(total, 20u);
    ASSERT_GE(s.count(AgentStatus::kFinished), finished);
    finished = s.count(AgentStatus::kFinished);
  }
}

TEST(StationModel, EntranceAdmitsAtMostCapacityPerIteration) {
  ModelConfig c = config_with(12);
  c.gate_interval = 0;
  ModelState s = build_model(c, 8);
  Rng rng = make_rng(8);
  step(s, rng);
  std::array<int, 3> per_door{};
  for (std::size_t i = 0; i < s.n_agents(); ++i) {
    if (s.agents[i].status == AgentStatus::kActive) ++per_door[(*s.params)[i].entrance_index];
  }
  for (int n : per_door) EXPECT_LE(n, 2);
}

TEST(StationModel, SameSeedSameTrajectory) {
  ModelState a = build_model(config_with(15), 9);
  ModelState b = build_model(config_with(15), 9);
  Rng ra = make_rng(99);
  Rng rb = make_rng(99);
  run_to_end(a, ra);
  run_to_end(b, rb);
  EXPECT_EQ(a.iteration, b.iteration);
  EXPECT_EQ(a.collision_count, b.collision_count);
  EXPECT_EQ(partial_state(a), partial_state(b));
}

TEST(StationModel, RejectsInvalidConfig) {
  ModelConfig c;
  c.n_agents = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = ModelConfig{};
  c.speed_min = 3.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = ModelConfig{};
  c.geometry.entrances[1].centre = 52.0;
  EXPECT_THROW(c.validate(), ConfigError);
}
