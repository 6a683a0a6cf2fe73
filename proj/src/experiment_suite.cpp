#include "crowd_assim/experiment_suite.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <stdexcept>

#include "crowd_assim/errors.hpp"
#include "crowd_assim/parallel.hpp"
#include "crowd_assim/seeding.hpp"
#include "crowd_assim/twin_harness.hpp"

namespace crowd_assim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double nu_of(const WindowRecord& r, ErrorPhase phase) {
  return phase == ErrorPhase::kAfter ? r.nu_after : r.nu_before;
}

double mean_of(std::span<const double> v) {
  return v.empty() ? kNaN : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance_of(std::span<const double> v) {
  if (v.empty()) return kNaN;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / static_cast<double>(v.size());
}

FilterConfig cell_filter(const FilterConfig& base, const CellKey& key) {
  FilterConfig f = base;
  f.n_particles = key.n_particles;
  f.particle_noise_sigma = key.sigma_p;
  return f;
}

ModelConfig cell_model(const ModelConfig& base, std::size_t n_agents) {
  ModelConfig m = base;
  m.n_agents = n_agents;
  return m;
}

CellResult finish_cell(const CellKey& key, double sigma_m,
                       const std::vector<std::vector<WindowRecord>>& runs,
                       std::optional<std::string> failure) {
  CellResult cell;
  cell.key = key;
  cell.sigma_m = sigma_m;
  cell.repetitions = runs.size();
  if (failure) {
    cell.failure = std::move(failure);
    cell.e_before = cell.e_after = cell.e_after_times_np = kNaN;
    return cell;
  }
  for (const auto& run : runs) {
    cell.repetition_means_before.push_back(repetition_mean(run, ErrorPhase::kBefore));
    cell.repetition_means_after.push_back(repetition_mean(run, ErrorPhase::kAfter));
  }
  cell.e_before = median(cell.repetition_means_before);
  cell.e_after = median(cell.repetition_means_after);
  cell.e_after_times_np = cell.e_after * static_cast<double>(key.n_particles);
  cell.windows = summarize_windows(runs);
  return cell;
}

}  // namespace

double repetition_mean(std::span<const WindowRecord> windows, ErrorPhase phase) {
  if (windows.empty()) throw std::invalid_argument("repetition has no windows");
  double acc = 0.0;
  for (const WindowRecord& r : windows) acc += nu_of(r, phase);
  return acc / static_cast<double>(windows.size());
}

double aggregate_error(const std::vector<std::vector<WindowRecord>>& by_repetition,
                       ErrorPhase phase) {
  if (by_repetition.empty()) throw std::invalid_argument("no repetitions to aggregate");
  std::vector<double> means;
  means.reserve(by_repetition.size());
  for (const auto& run : by_repetition) means.push_back(repetition_mean(run, phase));
  return median(std::move(means));
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

void GridSpec::validate() const {
  if (agent_counts.empty()) throw ConfigError("grid_agents must not be empty");
  if (particle_counts.empty()) throw ConfigError("grid_particles must not be empty");
  if (noise_levels.empty()) throw ConfigError("grid_noise must not be empty");
  if (repetitions < 1) throw ConfigError("reps must be at least 1");
  if (window_length < 1) throw ConfigError("window must be at least 1");
  if (!(measurement_sigma >= 0.0)) throw ConfigError("measurement_noise must be non-negative");
  for (std::size_t a : agent_counts) {
    if (a < 1) throw ConfigError("grid_agents entries must be at least 1");
  }
  for (std::size_t p : particle_counts) {
    if (p < 1) throw ConfigError("grid_particles entries must be at least 1");
  }
  for (double s : noise_levels) {
    if (!(s >= 0.0)) throw ConfigError("grid_noise entries must be non-negative");
  }
}

GridSpec GridSpec::desk_scale() {
  GridSpec spec;
  spec.repetitions = 5;
  return spec;
}

GridSpec GridSpec::full_scale() {
  GridSpec spec;
  spec.agent_counts = {2, 5, 10, 15, 20, 25, 30, 35, 40};
  spec.particle_counts = {1, 10, 100, 1000, 10000};
  spec.repetitions = 20;
  return spec;
}

std::vector<WindowSummary> summarize_windows(
    const std::vector<std::vector<WindowRecord>>& by_repetition, std::int64_t max_iteration) {
  std::map<std::int64_t, std::pair<std::vector<double>, std::vector<double>>> by_window;
  for (const auto& run : by_repetition) {
    for (const WindowRecord& r : run) {
      if (max_iteration >= 0 && r.iteration > max_iteration) continue;
      auto& [nus, vars] = by_window[r.window_index];
      nus.push_back(r.nu_after);
      vars.push_back(r.error_variance);
    }
  }
  std::vector<WindowSummary> out;
  out.reserve(by_window.size());
  for (const auto& [index, samples] : by_window) {
    const auto& [nus, vars] = samples;
    WindowSummary s;
    s.window_index = index;
    s.samples = nus.size();
    s.nu_mean = mean_of(nus);
    s.nu_q1 = quantile(nus, 0.25);
    s.nu_median = quantile(nus, 0.5);
    s.nu_q3 = quantile(nus, 0.75);
    s.nu_variance = variance_of(nus);
    s.error_variance_mean = mean_of(vars);
    out.push_back(s);
  }
  return out;
}

std::uint64_t truth_seed_for(std::uint64_t base_seed, std::size_t n_agents, std::size_t repetition) {
  return derive_seed(base_seed, {key(Stream::kTruth), n_agents, key(Stream::kRepetition), repetition});
}

std::uint64_t filter_seed_for(std::uint64_t base_seed, const CellKey& cell, std::size_t repetition) {
  return derive_seed(base_seed, {key(Stream::kFilter), key(Stream::kCell), cell.n_agents,
                                 cell.n_particles, key(cell.sigma_p), key(Stream::kRepetition),
                                 repetition});
}

CellResult run_cell(const ModelConfig& model, const FilterConfig& filter, const CellKey& key,
                    std::size_t repetitions, std::uint64_t base_seed, unsigned threads) {
  const ModelConfig m = cell_model(model, key.n_agents);
  const FilterConfig f = cell_filter(filter, key);
  std::vector<std::vector<WindowRecord>> runs(repetitions);
  std::optional<std::string> failure;
  try {
    parallel_for(repetitions, threads, [&](std::size_t rep) {
      runs[rep] = run_filter_experiment(m, f, truth_seed_for(base_seed, key.n_agents, rep),
                                        filter_seed_for(base_seed, key, rep))
                      .windows;
    });
  } catch (const DegeneracyError& e) {
    failure = e.what();
  }
  return finish_cell(key, f.measurement_noise_sigma, runs, std::move(failure));
}

// Repetitions of every cell are flattened into one job list so the worker
// pool stays busy across cell boundaries.
std::vector<CellResult> run_grid(const GridSpec& spec, const ModelConfig& model,
                                 const FilterConfig& filter, std::uint64_t base_seed,
                                 const GridOptions& options) {
  spec.validate();
  FilterConfig base = filter;
  base.window_length = spec.window_length;
  base.measurement_noise_sigma = spec.measurement_sigma;

  const std::set<CellKey> completed(options.completed.begin(), options.completed.end());
  std::vector<CellKey> cells;
  for (std::size_t a : spec.agent_counts) {
    for (std::size_t p : spec.particle_counts) {
      for (double s : spec.noise_levels) {
        const CellKey k{a, p, s};
        if (!completed.contains(k)) cells.push_back(k);
      }
    }
  }
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());

  const std::size_t reps = spec.repetitions;
  struct CellSlot {
    std::vector<std::vector<WindowRecord>> runs;
    std::optional<std::string> failure;
    std::size_t remaining = 0;
  };
  std::vector<CellSlot> slots(cells.size());
  for (auto& slot : slots) {
    slot.runs.resize(reps);
    slot.remaining = reps;
  }
  std::vector<CellResult> results(cells.size());
  std::mutex mutex;

  parallel_for(cells.size() * reps, options.threads, [&](std::size_t job) {
    const std::size_t c = job / reps;
    const std::size_t rep = job % reps;
    const CellKey& k = cells[c];
    std::vector<WindowRecord> windows;
    std::optional<std::string> failure;
    try {
      windows = run_filter_experiment(cell_model(model, k.n_agents), cell_filter(base, k),
                                      truth_seed_for(base_seed, k.n_agents, rep),
                                      filter_seed_for(base_seed, k, rep))
                    .windows;
    } catch (const DegeneracyError& e) {
      failure = e.what();
    }
    std::lock_guard lock(mutex);
    CellSlot& slot = slots[c];
    slot.runs[rep] = std::move(windows);
    if (failure && !slot.failure) slot.failure = std::move(failure);
    if (--slot.remaining == 0) {
      results[c] = finish_cell(k, base.measurement_noise_sigma, slot.runs, slot.failure);
      slot.runs.clear();
      if (options.on_cell) options.on_cell(results[c]);
    }
  });
  return results;
}

PolyFit fit_polynomial(std::span<const double> x, std::span<const double> y, int degree) {
  if (x.size() != y.size()) throw DimensionError("fit_polynomial: x and y lengths differ");
  if (degree < 0) throw std::invalid_argument("fit_polynomial: negative degree");
  const auto n = static_cast<Eigen::Index>(x.size());
  const Eigen::Index cols = degree + 1;
  Eigen::MatrixXd design(n, cols);
  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double power = 1.0;
    for (Eigen::Index j = 0; j < cols; ++j) {
      design(i, j) = power;
      power *= x[static_cast<std::size_t>(i)];
    }
    target(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd coef = design.completeOrthogonalDecomposition().solve(target);

  PolyFit fit;
  fit.coefficients.assign(coef.data(), coef.data() + coef.size());
  const double mean_y = n > 0 ? target.mean() : 0.0;
  const double ss_res = (design * coef - target).squaredNorm();
  const double ss_tot = (target.array() - mean_y).square().sum();
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : kNaN;
  return fit;
}

CollisionStudy collision_study(const ModelConfig& model, std::span<const std::size_t> agent_counts,
                               std::size_t seeds_per_count, std::uint64_t base_seed,
                               unsigned threads) {
  if (seeds_per_count < 1) throw ConfigError("seeds must be at least 1");
  for (std::size_t a : agent_counts) {
    if (a < 1) throw ConfigError("agent counts must be at least 1");
  }
  CollisionStudy study;
  study.agent_counts.assign(agent_counts.begin(), agent_counts.end());
  study.rows.resize(agent_counts.size() * seeds_per_count);

  parallel_for(study.rows.size(), threads, [&](std::size_t job) {
    const std::size_t n_agents = agent_counts[job / seeds_per_count];
    const std::size_t rep = job % seeds_per_count;
    const std::uint64_t seed = truth_seed_for(base_seed, n_agents, rep);
    ModelConfig m = cell_model(model, n_agents);
    // One giant window: only the terminal state is needed.
    const TruthRun run = run_truth(m, seed, m.iteration_cap);
    study.rows[job] = {n_agents, seed, run.collision_count};
  });

  std::vector<double> xs;
  for (std::size_t c = 0; c < agent_counts.size(); ++c) {
    double acc = 0.0;
    for (std::size_t r = 0; r < seeds_per_count; ++r) {
      acc += static_cast<double>(study.rows[c * seeds_per_count + r].collisions);
    }
    xs.push_back(static_cast<double>(agent_counts[c]));
    study.mean_collisions.push_back(acc / static_cast<double>(seeds_per_count));
  }
  study.linear = fit_polynomial(xs, study.mean_collisions, 1);
  study.quadratic = fit_polynomial(xs, study.mean_collisions, 2);
  return study;
}

std::vector<VarianceCell> variance_study(
    const ModelConfig& model, const FilterConfig& filter,
    std::span<const std::pair<std::size_t, std::size_t>> cells, std::size_t repetitions,
    std::uint64_t base_seed, std::int64_t iteration_cap, unsigned threads) {
  if (repetitions < 1) throw ConfigError("reps must be at least 1");
  std::vector<VarianceCell> out(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    out[c].n_agents = cells[c].first;
    out[c].n_particles = cells[c].second;
    out[c].runs.resize(repetitions);
  }
  parallel_for(cells.size() * repetitions, threads, [&](std::size_t job) {
    const std::size_t c = job / repetitions;
    const std::size_t rep = job % repetitions;
    const CellKey k{cells[c].first, cells[c].second, filter.particle_noise_sigma};
    ModelConfig m = cell_model(model, k.n_agents);
    m.iteration_cap = std::min(m.iteration_cap, iteration_cap);
    out[c].runs[rep] = run_filter_experiment(m, cell_filter(filter, k),
                                             truth_seed_for(base_seed, k.n_agents, rep),
                                             filter_seed_for(base_seed, k, rep))
                           .windows;
  });
  for (VarianceCell& cell : out) cell.windows = summarize_windows(cell.runs, iteration_cap);
  return out;
}

}  // namespace crowd_assim
