#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crowd_assim/particle_filter.hpp"
#include "crowd_assim/station_model.hpp"

namespace crowd_assim {

enum class ErrorPhase { kBefore, kAfter };

/// Mean over windows of nu before or after resampling.
double repetition_mean(std::span<const WindowRecord> windows, ErrorPhase phase);

/// Median over repetitions of the per-repetition window mean. Throws
/// std::invalid_argument when there are no repetitions or a repetition has no
/// windows.
double aggregate_error(const std::vector<std::vector<WindowRecord>>& by_repetition,
                       ErrorPhase phase);

double median(std::vector<double> values);
/// Linear-interpolated quantile, q in [0, 1].
double quantile(std::vector<double> values, double q);

struct GridSpec {
  std::vector<std::size_t> agent_counts{5, 10, 20, 30, 40};
  std::vector<std::size_t> particle_counts{1, 10, 100, 1000, 2000};
  std::vector<double> noise_levels{0.25, 0.5};
  std::size_t repetitions = 20;
  std::int64_t window_length = 100;
  double measurement_sigma = 1.0;

  void validate() const;

  /// Desk-sized grid: 5 x 5 x 2 cells, 5 repetitions.
  static GridSpec desk_scale();
  /// The full ranges: 2..40 agents, 1..10000 particles, 20 repetitions.
  static GridSpec full_scale();
};

struct CellKey {
  std::size_t n_agents = 0;
  std::size_t n_particles = 0;
  double sigma_p = 0.0;

  friend bool operator==(const CellKey&, const CellKey&) = default;
  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

/// Distribution of nu over repetitions for one window index.
struct WindowSummary {
  std::int64_t window_index = 0;
  std::size_t samples = 0;
  double nu_mean = 0.0;
  double nu_q1 = 0.0;
  double nu_median = 0.0;
  double nu_q3 = 0.0;
  double nu_variance = 0.0;
  /// Mean over repetitions of the within-set particle-error variance.
  double error_variance_mean = 0.0;
};

/// Per-window summaries across repetitions; windows past `max_iteration`
/// are dropped.
std::vector<WindowSummary> summarize_windows(
    const std::vector<std::vector<WindowRecord>>& by_repetition,
    std::int64_t max_iteration = -1);

struct CellResult {
  CellKey key;
  double sigma_m = 0.0;
  std::size_t repetitions = 0;
  double e_before = 0.0;
  double e_after = 0.0;
  /// e_after multiplied by the particle count, the literal reading of the
  /// aggregate formula that sums over particles.
  double e_after_times_np = 0.0;
  std::vector<double> repetition_means_before;
  std::vector<double> repetition_means_after;
  std::vector<WindowSummary> windows;
  /// Set when a repetition failed; the error fields are then NaN.
  std::optional<std::string> failure;
};

/// Seeds for one repetition. The truth seed depends only on the agent count
/// and repetition, so every particle count and noise level is scored against
/// the same pseudo-truth; the filter seed is unique to the whole cell.
std::uint64_t truth_seed_for(std::uint64_t base_seed, std::size_t n_agents, std::size_t repetition);
std::uint64_t filter_seed_for(std::uint64_t base_seed, const CellKey& key, std::size_t repetition);

/// Runs M repetitions of one cell. Repetitions run in parallel on `threads`
/// workers; the result does not depend on the thread count.
CellResult run_cell(const ModelConfig& model, const FilterConfig& filter, const CellKey& key,
                    std::size_t repetitions, std::uint64_t base_seed, unsigned threads = 1);

struct GridOptions {
  unsigned threads = 1;
  /// Cells already present in an earlier output; skipped.
  std::vector<CellKey> completed;
  /// Called once per finished cell, in completion order, from a worker
  /// thread (calls are serialized).
  std::function<void(const CellResult&)> on_cell;
};

/// Full factorial sweep. Returns results for the cells actually run, sorted
/// by key.
std::vector<CellResult> run_grid(const GridSpec& spec, const ModelConfig& model,
                                 const FilterConfig& filter, std::uint64_t base_seed,
                                 const GridOptions& options = {});

struct PolyFit {
  /// Coefficients from the constant term upward.
  std::vector<double> coefficients;
  double r_squared = 0.0;
};

/// Ordinary least-squares polynomial fit.
PolyFit fit_polynomial(std::span<const double> x, std::span<const double> y, int degree);

struct CollisionRow {
  std::size_t n_agents = 0;
  std::uint64_t seed = 0;
  std::int64_t collisions = 0;
};

struct CollisionStudy {
  std::vector<CollisionRow> rows;
  std::vector<std::size_t> agent_counts;
  std::vector<double> mean_collisions;
  PolyFit linear;
  PolyFit quadratic;
};

/// Bare model runs (no filter): cumulative collisions per run, and degree 1
/// and 2 fits of the mean count against the agent count.
CollisionStudy collision_study(const ModelConfig& model, std::span<const std::size_t> agent_counts,
                               std::size_t seeds_per_count, std::uint64_t base_seed,
                               unsigned threads = 1);

struct VarianceCell {
  std::size_t n_agents = 0;
  std::size_t n_particles = 0;
  std::vector<WindowSummary> windows;
  std::vector<std::vector<WindowRecord>> runs;
};

/// Repeated experiments per (agents, particles) cell, each run stopped at
/// `iteration_cap`, summarized per window.
std::vector<VarianceCell> variance_study(
    const ModelConfig& model, const FilterConfig& filter,
    std::span<const std::pair<std::size_t, std::size_t>> cells, std::size_t repetitions,
    std::uint64_t base_seed, std::int64_t iteration_cap = 600, unsigned threads = 1);

}  // namespace crowd_assim
