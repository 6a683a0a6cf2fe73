#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "crowd_assim/seeding.hpp"
#include "crowd_assim/station_model.hpp"

namespace crowd_assim {

/// How a particle is turned into an unnormalized weight given an observation.
enum class Weighting {
  /// exp(-|S' - O|^2 / (2 sigma_m^2)) over the whole flattened position
  /// vector: the observation likelihood under independent Gaussian noise.
  kGaussianLikelihood,
  /// exp(-error^2 / (2 sigma_m^2)) with error the mean per-agent distance.
  kGaussianMeanDistance,
  /// 1 / (error + 1e-9)
  kInverseDistance,
};

/// When roughening noise is added during predict.
enum class Roughening {
  /// Once, at the end of each predict window.
  kPerWindow,
  /// After every model iteration inside the window.
  kPerIteration,
};

inline constexpr double kWeightEpsilon = 1e-9;

struct FilterConfig {
  std::size_t n_particles = 100;
  std::int64_t window_length = 100;
  double particle_noise_sigma = 0.25;
  double measurement_noise_sigma = 1.0;
  bool resampling_enabled = true;
  Weighting weighting = Weighting::kGaussianLikelihood;
  Roughening roughening = Roughening::kPerWindow;

  void validate() const;
};

struct Particle {
  ModelState model;
  double weight = 0.0;
  /// Error against the most recent observation.
  double error = 0.0;
};

struct ParticleSet {
  std::vector<Particle> particles;
  std::int64_t window_index = 0;

  std::size_t size() const { return particles.size(); }
};

/// One assimilation. `iteration` and `active_agents` describe the truth and
/// are filled in by the caller that owns it.
struct WindowRecord {
  std::int64_t window_index = 0;
  std::int64_t iteration = 0;
  std::int64_t length = 0;
  double nu_before = 0.0;
  double nu_after = 0.0;
  double weight_variance = 0.0;
  double error_variance = 0.0;
  std::size_t active_agents = 0;
  double flat_l2_before = 0.0;
  double flat_l2_after = 0.0;
};

/// N identical copies of `initial`, each with weight 1/N.
ParticleSet make_particle_set(const ModelState& initial, std::size_t n_particles);

/// Mean over agents of the Euclidean distance between matching (x, y) pairs.
/// Throws DimensionError when the lengths differ or are odd.
double particle_error(std::span<const double> particle, std::span<const double> truth);
double particle_error(const ModelState& particle, std::span<const double> truth);

/// Euclidean norm of the whole flattened difference vector.
double flat_l2_distance(std::span<const double> particle, std::span<const double> truth);

/// Unweighted mean of the particle errors.
double filter_error(const ParticleSet& set, std::span<const double> observation);

/// Adds N(0, sigma^2) to both coordinates of every active agent, then clamps.
void roughen(ModelState& state, double sigma, Rng& rng);

/// Advances every particle `window_length` iterations and roughens it with
/// N(0, particle_noise_sigma^2) on the schedule in `config`. Particle k draws
/// from a stream keyed by (stream_seed, window_index, k), so results do not
/// depend on `threads`.
void predict(ParticleSet& set, std::int64_t window_length, const FilterConfig& config,
             std::uint64_t stream_seed, unsigned threads = 1);

/// Stores each particle's error and sets normalized weights.
void reweight(ParticleSet& set, std::span<const double> observation, Weighting weighting,
              double measurement_sigma);

/// Ancestor indices (0-based) chosen by systematic resampling: pointer
/// u_i = i/N + u_offset (scaled by the weight total) selects the slot j with
/// cum[j-1] < u_i <= cum[j], u_offset in (0, 1/N]. `weights` must be
/// non-negative and not all zero.
std::vector<std::size_t> systematic_indices(std::span<const double> weights, double u_offset);

/// Replaces the set by N weighted draws; every survivor gets weight 1/N.
/// Throws DegeneracyError if the weights are all zero or not finite.
void systematic_resample(ParticleSet& set, Rng& rng);

/// Weight, optionally resample, and report errors before and after.
WindowRecord assimilation_step(ParticleSet& set, std::span<const double> observation,
                               const FilterConfig& config, Rng& rng);

}  // namespace crowd_assim
