#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "crowd_assim/particle_filter.hpp"
#include "crowd_assim/seeding.hpp"
#include "crowd_assim/station_model.hpp"

namespace crowd_assim {

/// A complete pseudo-truth run sampled at window boundaries.
struct TruthRun {
  ModelConfig config;
  std::uint64_t truth_seed = 0;
  /// Noiseless partial state at the end of each window, including a final
  /// shorter window when the run ends between boundaries.
  std::vector<PartialState> states_by_window;
  std::vector<std::int64_t> window_iterations;
  std::int64_t total_iterations = 0;
  std::int64_t collision_count = 0;
  bool cap_reached = false;
};

/// Builds the truth model for `seed` and steps it to completion or to the
/// iteration cap. Uses the same streams as run_filter_experiment, so the
/// trajectories agree for equal seeds.
TruthRun run_truth(const ModelConfig& config, std::uint64_t seed, std::int64_t window_length = 100);

/// Adds N(0, sigma_m^2) to every coordinate. No clamping.
PartialState observe(std::span<const double> truth, double sigma_m, Rng& rng);

struct ExperimentResult {
  std::vector<WindowRecord> windows;
  std::int64_t truth_iterations = 0;
  std::int64_t truth_collisions = 0;
  bool cap_reached = false;
};

/// Identical-twin experiment. The truth and the particle set advance in
/// lockstep one window at a time; the filter sees only noisy observations
/// and the truth's fixed agent parameters. Stops at the first window
/// boundary where the truth has finished (or hit its cap).
ExperimentResult run_filter_experiment(const ModelConfig& config, const FilterConfig& filter,
                                       std::uint64_t truth_seed, std::uint64_t filter_seed,
                                       unsigned threads = 1);

}  // namespace crowd_assim
