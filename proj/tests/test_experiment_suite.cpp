#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "crowd_assim/experiment_suite.hpp"

using namespace crowd_assim;

namespace {

std::vector<WindowRecord> windows_with_after(const std::vector<double>& values) {
  std::vector<WindowRecord> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    WindowRecord r;
    r.window_index = static_cast<std::int64_t>(i);
    r.nu_after = values[i];
    r.nu_before = 2.0 * values[i];
    out.push_back(r);
  }
  return out;
}

GridSpec tiny_grid() {
  GridSpec g;
  g.agent_counts = {2, 3};
  g.particle_counts = {2, 4};
  g.noise_levels = {0.25};
  g.repetitions = 2;
  return g;
}

}  // namespace

TEST(AggregateError, MeanOfTwoWindows) {
  EXPECT_DOUBLE_EQ(aggregate_error({windows_with_after({2.0, 4.0})}, ErrorPhase::kAfter), 3.0);
  EXPECT_DOUBLE_EQ(aggregate_error({windows_with_after({2.0, 4.0})}, ErrorPhase::kBefore), 6.0);
}

TEST(AggregateError, MedianIgnoresOutlier) {
  const std::vector<std::vector<WindowRecord>> runs{
      windows_with_after({1.0}), windows_with_after({100.0}), windows_with_after({2.0})};
  EXPECT_DOUBLE_EQ(aggregate_error(runs, ErrorPhase::kAfter), 2.0);
}

TEST(AggregateError, EmptyInputThrows) {
  EXPECT_THROW(aggregate_error({}, ErrorPhase::kAfter), std::invalid_argument);
  EXPECT_THROW(aggregate_error({{}}, ErrorPhase::kAfter), std::invalid_argument);
}

TEST(AggregateError, MatchesSortBasedOracle) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> value(0.0, 20.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 1 + trial % 9;
    std::vector<std::vector<WindowRecord>> runs;
    std::vector<double> means;
    for (std::size_t r = 0; r < m; ++r) {
      std::vector<double> vals(1 + (trial + r) % 6);
      double sum = 0.0;
      for (double& v : vals) sum += (v = value(rng));
      means.push_back(sum / static_cast<double>(vals.size()));
      runs.push_back(windows_with_after(vals));
    }
    std::sort(means.begin(), means.end());
    const double oracle = m % 2 ? means[m / 2] : 0.5 * (means[m / 2 - 1] + means[m / 2]);
    EXPECT_NEAR(aggregate_error(runs, ErrorPhase::kAfter), oracle, 1e-12);
  }
}

TEST(Quantile, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(quantile({4.0, 1.0, 3.0, 2.0}, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile({4.0, 1.0, 3.0, 2.0}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({5.0}, 0.75), 5.0);
}

TEST(Seeds, DistinctAcrossCellsAndRepetitions) {
  std::set<std::uint64_t> filter_seeds;
  std::set<std::uint64_t> truth_seeds;
  std::size_t cells = 0;
  for (std::size_t a : {2u, 5u, 10u}) {
    for (std::size_t rep = 0; rep < 5; ++rep) truth_seeds.insert(truth_seed_for(1, a, rep));
    for (std::size_t p : {1u, 10u, 100u}) {
      for (double s : {0.25, 0.5}) {
        for (std::size_t rep = 0; rep < 5; ++rep) {
          filter_seeds.insert(filter_seed_for(1, {a, p, s}, rep));
          ++cells;
        }
      }
    }
  }
  EXPECT_EQ(truth_seeds.size(), 15u);
  EXPECT_EQ(filter_seeds.size(), cells);
  EXPECT_NE(truth_seed_for(1, 5, 0), truth_seed_for(2, 5, 0));
}

TEST(RunGrid, SingleCellSingleRepetition) {
  GridSpec g;
  g.agent_counts = {2};
  g.particle_counts = {3};
  g.noise_levels = {0.25};
  g.repetitions = 1;
  const auto results = run_grid(g, ModelConfig{}, FilterConfig{}, 5);
  ASSERT_EQ(results.size(), 1u);
  EXPECT_EQ(results[0].repetitions, 1u);
  EXPECT_GE(results[0].e_after, 0.0);
  EXPECT_DOUBLE_EQ(results[0].e_after_times_np, 3.0 * results[0].e_after);
}

TEST(RunGrid, FullFactorialSortedAndThreadIndependent) {
  const GridSpec g = tiny_grid();
  GridOptions serial;
  GridOptions parallel;
  parallel.threads = 3;
  std::size_t callbacks = 0;
  parallel.on_cell = [&](const CellResult&) { ++callbacks; };
  const auto a = run_grid(g, ModelConfig{}, FilterConfig{}, 11, serial);
  const auto b = run_grid(g, ModelConfig{}, FilterConfig{}, 11, parallel);
  ASSERT_EQ(a.size(), 4u);
  ASSERT_EQ(b.size(), 4u);
  EXPECT_EQ(callbacks, 4u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].key, b[i].key);
    EXPECT_EQ(a[i].e_after, b[i].e_after);
    EXPECT_EQ(a[i].e_before, b[i].e_before);
    if (i) EXPECT_LT(a[i - 1].key, a[i].key);
  }
}

TEST(RunGrid, MatchesRunCell) {
  const GridSpec g = tiny_grid();
  const auto grid = run_grid(g, ModelConfig{}, FilterConfig{}, 11);
  FilterConfig f;
  f.window_length = g.window_length;
  const CellResult cell = run_cell(ModelConfig{}, f, grid[2].key, g.repetitions, 11);
  EXPECT_EQ(cell.e_after, grid[2].e_after);
  EXPECT_EQ(cell.repetition_means_before, grid[2].repetition_means_before);
}

TEST(RunGrid, SkipsCompletedCells) {
  GridOptions options;
  options.completed = {{2, 2, 0.25}, {3, 4, 0.25}};
  const auto results = run_grid(tiny_grid(), ModelConfig{}, FilterConfig{}, 11, options);
  ASSERT_EQ(results.size(), 2u);
  EXPECT_EQ(results[0].key, (CellKey{2, 4, 0.25}));
  EXPECT_EQ(results[1].key, (CellKey{3, 2, 0.25}));
}

TEST(RunGrid, RejectsEmptyLists) {
  GridSpec g = tiny_grid();
  g.particle_counts.clear();
  EXPECT_THROW(run_grid(g, ModelConfig{}, FilterConfig{}, 1), std::runtime_error);
}

TEST(FitPolynomial, RecoversExactQuadratic) {
  const std::vector<double> x{0.0, 1.0, 2.0, 3.0, 5.0};
  std::vector<double> y;
  for (double v : x) y.push_back(1.0 - 2.0 * v + 0.5 * v * v);
  const PolyFit fit = fit_polynomial(x, y, 2);
  ASSERT_EQ(fit.coefficients.size(), 3u);
  EXPECT_NEAR(fit.coefficients[0], 1.0, 1e-10);
  EXPECT_NEAR(fit.coefficients[1], -2.0, 1e-10);
  EXPECT_NEAR(fit.coefficients[2], 0.5, 1e-10);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
}

TEST(FitPolynomial, LinearMatchesClosedForm) {
  const std::vector<double> x{1.0, 2.0, 4.0, 7.0};
  const std::vector<double> y{3.0, 1.0, 6.0, 9.0};
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / 4.0;
    my += y[i] / 4.0;
  }
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  const PolyFit fit = fit_polynomial(x, y, 1);
  EXPECT_NEAR(fit.coefficients[1], sxy / sxx, 1e-12);
  EXPECT_NEAR(fit.coefficients[0], my - sxy / sxx * mx, 1e-12);
  EXPECT_NEAR(fit.r_squared, sxy * sxy / (sxx * syy), 1e-12);
}

TEST(CollisionStudy, SingleAgentHasNoCollisions) {
  const std::vector<std::size_t> counts{1};
  const CollisionStudy s = collision_study(ModelConfig{}, counts, 4, 3);
  ASSERT_EQ(s.rows.size(), 4u);
  for (const auto& r : s.rows) EXPECT_EQ(r.collisions, 0);
}

TEST(CollisionStudy, QuadraticFitsAtLeastAsWell) {
  const std::vector<std::size_t> counts{2, 5, 10, 15};
  const CollisionStudy s = collision_study(ModelConfig{}, counts, 3, 3, 2);
  EXPECT_EQ(s.mean_collisions.size(), counts.size());
  EXPECT_GE(s.quadratic.r_squared, s.linear.r_squared - 1e-12);
}

TEST(VarianceStudy, TruncatesAtIterationCap) {
  FilterConfig f;
  f.n_particles = 5;
  const std::vector<std::pair<std::size_t, std::size_t>> cells{{5, 5}};
  const auto out = variance_study(ModelConfig{}, f, cells, 3, 2, 300);
  ASSERT_EQ(out.size(), 1u);
  ASSERT_FALSE(out[0].windows.empty());
  for (const auto& run : out[0].runs) {
    for (const auto& r : run) EXPECT_LE(r.iteration, 300);
  }
  for (const auto& w : out[0].windows) {
    EXPECT_LE(w.nu_q1, w.nu_median);
    EXPECT_LE(w.nu_median, w.nu_q3);
    EXPECT_GE(w.nu_variance, 0.0);
  }
}
