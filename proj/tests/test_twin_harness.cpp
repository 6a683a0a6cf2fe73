#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "crowd_assim/twin_harness.hpp"

using namespace crowd_assim;

namespace {

ModelConfig agents(std::size_t n) {
  ModelConfig c;
  c.n_agents = n;
  return c;
}

bool same_records(const std::vector<WindowRecord>& a, const std::vector<WindowRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].iteration != b[i].iteration || a[i].nu_before != b[i].nu_before ||
        a[i].nu_after != b[i].nu_after || a[i].weight_variance != b[i].weight_variance ||
        a[i].error_variance != b[i].error_variance) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST(RunTruth, SameSeedSameRun) {
  const TruthRun a = run_truth(agents(12), 5);
  const TruthRun b = run_truth(agents(12), 5);
  EXPECT_EQ(a.states_by_window, b.states_by_window);
  EXPECT_EQ(a.collision_count, b.collision_count);
  EXPECT_EQ(a.total_iterations, b.total_iterations);
}

TEST(RunTruth, OneRecordPerWindowIncludingPartialLast) {
  const TruthRun run = run_truth(agents(6), 8, 50);
  ASSERT_FALSE(run.cap_reached);
  const auto expected = static_cast<std::size_t>((run.total_iterations + 49) / 50);
  EXPECT_EQ(run.states_by_window.size(), expected);
  EXPECT_EQ(run.window_iterations.back(), run.total_iterations);
  for (std::size_t w = 0; w + 1 < run.window_iterations.size(); ++w) {
    EXPECT_EQ(run.window_iterations[w], static_cast<std::int64_t>(50 * (w + 1)));
  }
}

TEST(RunTruth, SingleAgentNeverCollides) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    EXPECT_EQ(run_truth(agents(1), seed).collision_count, 0);
  }
}

TEST(RunTruth, MoreAgentsMoreCollisions) {
  double few = 0.0;
  double many = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    few += static_cast<double>(run_truth(agents(5), seed).collision_count);
    many += static_cast<double>(run_truth(agents(40), seed).collision_count);
  }
  EXPECT_GT(many, few);
}

TEST(RunTruth, CapIsFlagged) {
  ModelConfig c = agents(10);
  c.iteration_cap = 30;
  const TruthRun run = run_truth(c, 1, 100);
  EXPECT_TRUE(run.cap_reached);
  EXPECT_EQ(run.total_iterations, 30);
}

TEST(Observe, ZeroNoiseIsIdentity) {
  const std::vector<double> truth{1.0, 2.0, 3.0, 4.0};
  Rng rng = make_rng(1);
  EXPECT_EQ(observe(truth, 0.0, rng), truth);
}

TEST(Observe, SampleMeanWithinStandardErrorBound) {
  const std::vector<double> truth{10.0, -3.0, 400.0, 0.0};
  const double sigma = 2.0;
  const int n = 10000;
  Rng rng = make_rng(2);
  std::vector<double> sum(truth.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    const PartialState o = observe(truth, sigma, rng);
    ASSERT_EQ(o.size(), truth.size());
    for (std::size_t k = 0; k < o.size(); ++k) sum[k] += o[k];
  }
  const double bound = 3.0 * sigma / std::sqrt(static_cast<double>(n));
  for (std::size_t k = 0; k < truth.size(); ++k) EXPECT_NEAR(sum[k] / n, truth[k], bound);
}

TEST(FilterExperiment, LockstepWithTruth) {
  FilterConfig f;
  f.n_particles = 5;
  f.window_length = 40;
  const ExperimentResult result = run_filter_experiment(agents(8), f, 31, 32);
  const TruthRun truth = run_truth(agents(8), 31, 40);
  ASSERT_EQ(result.windows.size(), truth.states_by_window.size());
  for (std::size_t w = 0; w < result.windows.size(); ++w) {
    EXPECT_EQ(result.windows[w].iteration, truth.window_iterations[w]);
    EXPECT_EQ(result.windows[w].window_index, static_cast<std::int64_t>(w));
  }
  EXPECT_EQ(result.truth_iterations, truth.total_iterations);
}

TEST(FilterExperiment, ReproducibleAndThreadIndependent) {
  FilterConfig f;
  f.n_particles = 20;
  const auto a = run_filter_experiment(agents(10), f, 3, 4, 1).windows;
  const auto b = run_filter_experiment(agents(10), f, 3, 4, 3).windows;
  const auto c = run_filter_experiment(agents(10), f, 3, 5, 1).windows;
  EXPECT_TRUE(same_records(a, b));
  EXPECT_FALSE(same_records(a, c));
}

// With one agent and no roughening every particle reproduces the truth, so
// the error is the norm of a 2-D N(0, sigma^2) vector, whose mean is
// sigma * sqrt(pi / 2).
TEST(FilterExperiment, SingleAgentErrorIsMeasurementNoiseFloor) {
  FilterConfig f;
  f.n_particles = 4;
  f.window_length = 10;
  f.particle_noise_sigma = 0.0;
  f.measurement_noise_sigma = 1.0;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (const WindowRecord& r : run_filter_experiment(agents(1), f, seed, seed + 100).windows) {
      EXPECT_DOUBLE_EQ(r.nu_after, r.nu_before);
      EXPECT_NEAR(r.error_variance, 0.0, 1e-24);
      sum += r.nu_before;
      ++count;
    }
  }
  const double expected = std::sqrt(std::numbers::pi / 2.0);
  const double se = std::sqrt((4.0 - std::numbers::pi) / 2.0) / std::sqrt(static_cast<double>(count));
  EXPECT_NEAR(sum / static_cast<double>(count), expected, 4.0 * se);
}
