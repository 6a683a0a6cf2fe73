#include "crowd_assim/particle_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "crowd_assim/errors.hpp"
#include "crowd_assim/parallel.hpp"

namespace crowd_assim {

namespace {

void check_dims(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() % 2 != 0) {
    throw DimensionError("position vectors have lengths " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
  }
}

double population_variance(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return acc / n;
}

double mean_flat_l2(const ParticleSet& set, std::span<const double> observation) {
  double acc = 0.0;
  for (const Particle& p : set.particles) {
    acc += flat_l2_distance(partial_state(p.model), observation);
  }
  return acc / static_cast<double>(set.size());
}

}  // namespace

void FilterConfig::validate() const {
  if (n_particles < 1) throw ConfigError("particles must be at least 1");
  if (window_length < 1) throw ConfigError("window must be at least 1");
  if (!(particle_noise_sigma >= 0.0)) throw ConfigError("particle_noise must be non-negative");
  if (!(measurement_noise_sigma >= 0.0)) {
    throw ConfigError("measurement_noise must be non-negative");
  }
}

ParticleSet make_particle_set(const ModelState& initial, std::size_t n_particles) {
  ParticleSet set;
  set.particles.assign(n_particles, Particle{initial, 1.0 / static_cast<double>(n_particles), 0.0});
  return set;
}

double particle_error(std::span<const double> particle, std::span<const double> truth) {
  check_dims(particle, truth);
  const std::size_t agents = particle.size() / 2;
  if (agents == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < agents; ++i) {
    acc += std::hypot(truth[2 * i] - particle[2 * i], truth[2 * i + 1] - particle[2 * i + 1]);
  }
  return acc / static_cast<double>(agents);
}

double particle_error(const ModelState& particle, std::span<const double> truth) {
  return particle_error(partial_state(particle), truth);
}

double flat_l2_distance(std::span<const double> particle, std::span<const double> truth) {
  check_dims(particle, truth);
  double acc = 0.0;
  for (std::size_t k = 0; k < particle.size(); ++k) {
    const double d = truth[k] - particle[k];
    acc += d * d;
  }
  return std::sqrt(acc);
}

double filter_error(const ParticleSet& set, std::span<const double> observation) {
  if (set.particles.empty()) return 0.0;
  double acc = 0.0;
  for (const Particle& p : set.particles) acc += particle_error(p.model, observation);
  return acc / static_cast<double>(set.size());
}

void roughen(ModelState& state, double sigma, Rng& rng) {
  if (sigma <= 0.0) return;
  std::normal_distribution<double> noise(0.0, sigma);
  const EnvironmentGeometry& g = state.geometry();
  for (AgentState& a : state.agents) {
    if (a.status != AgentStatus::kActive) continue;
    const double nx = noise(rng);
    const double ny = noise(rng);
    a.position = clamp_to(g, {a.position.x + nx, a.position.y + ny});
  }
}

void predict(ParticleSet& set, std::int64_t window_length, const FilterConfig& config,
             std::uint64_t stream_seed, unsigned threads) {
  if (window_length <= 0) return;
  const auto window = static_cast<std::uint64_t>(set.window_index);
  const double sigma = config.particle_noise_sigma;
  const bool every_iteration = config.roughening == Roughening::kPerIteration;
  parallel_for(set.size(), threads, [&](std::size_t slot) {
    Rng rng = make_rng(derive_seed(stream_seed, {key(Stream::kParticle), window, slot}));
    ModelState& model = set.particles[slot].model;
    for (std::int64_t t = 0; t < window_length; ++t) {
      step(model, rng);
      if (every_iteration) roughen(model, sigma, rng);
    }
    if (!every_iteration) roughen(model, sigma, rng);
  });
}

void reweight(ParticleSet& set, std::span<const double> observation, Weighting weighting,
              double measurement_sigma) {
  if (set.particles.empty()) return;
  const std::size_t n = set.size();
  std::vector<double> misfit(n);
  for (std::size_t k = 0; k < n; ++k) {
    Particle& p = set.particles[k];
    const PartialState positions = partial_state(p.model);
    p.error = particle_error(positions, observation);
    if (weighting == Weighting::kGaussianLikelihood) {
      const double d = flat_l2_distance(positions, observation);
      misfit[k] = d * d;
    } else {
      misfit[k] = p.error * p.error;
    }
  }

  if (weighting == Weighting::kInverseDistance) {
    for (Particle& p : set.particles) p.weight = 1.0 / (p.error + kWeightEpsilon);
  } else {
    // Shifting by the best misfit keeps at least one weight at exactly 1.
    const double best = *std::min_element(misfit.begin(), misfit.end());
    const double two_var = 2.0 * measurement_sigma * measurement_sigma;
    for (std::size_t k = 0; k < n; ++k) {
      double& w = set.particles[k].weight;
      if (two_var > 0.0) {
        w = std::exp(-(misfit[k] - best) / two_var);
      } else {
        w = misfit[k] == best ? 1.0 : 0.0;
      }
    }
  }

  double total = 0.0;
  for (const Particle& p : set.particles) total += p.weight;
  for (Particle& p : set.particles) p.weight /= total;
}

std::vector<std::size_t> systematic_indices(std::span<const double> weights, double u_offset) {
  const std::size_t n = weights.size();
  std::vector<double> cumulative(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw DegeneracyError("particle weight " + std::to_string(i) + " is not a finite non-negative value");
    }
    total += weights[i];
    cumulative[i] = total;
  }
  if (!(total > 0.0)) throw DegeneracyError("all particle weights are zero");

  // The last positive-weight slot absorbs any rounding shortfall at the top
  // of the cumulative sum.
  std::size_t last = n - 1;
  while (weights[last] == 0.0) --last;

  std::vector<std::size_t> chosen(n);
  const double step_size = 1.0 / static_cast<double>(n);
  const double v = u_offset / step_size;
  // Pointer i falls in slot j when cum[j-1] < u_i <= cum[j]. The tolerance
  // absorbs rounding in the running sum, which otherwise misplaces pointers
  // that land exactly on a boundary (uniform weights with u_offset = 1/N).
  const double tolerance = 1e-12 * total;
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (static_cast<double>(i) + v) * step_size * total;
    while (j < last && u > cumulative[j] + tolerance) ++j;
    chosen[i] = j;
  }
  return chosen;
}

void systematic_resample(ParticleSet& set, Rng& rng) {
  const std::size_t n = set.size();
  if (n == 0) return;
  std::vector<double> weights(n);
  for (std::size_t i = 0; i < n; ++i) weights[i] = set.particles[i].weight;
  // Reflect [0, 1/N) onto (0, 1/N] to match the half-open slots above.
  const double step_size = 1.0 / static_cast<double>(n);
  std::uniform_real_distribution<double> offset(0.0, step_size);
  const auto chosen = systematic_indices(weights, step_size - offset(rng));

  std::vector<Particle> next;
  next.reserve(n);
  for (std::size_t ancestor : chosen) next.push_back(set.particles[ancestor]);
  for (Particle& p : next) p.weight = 1.0 / static_cast<double>(n);
  set.particles = std::move(next);
}

WindowRecord assimilation_step(ParticleSet& set, std::span<const double> observation,
                               const FilterConfig& config, Rng& rng) {
  WindowRecord record;
  record.window_index = set.window_index;

  reweight(set, observation, config.weighting, config.measurement_noise_sigma);
  std::vector<double> values(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) values[i] = set.particles[i].error;
  record.nu_before =
      std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(set.size());
  record.flat_l2_before = mean_flat_l2(set, observation);
  for (std::size_t i = 0; i < set.size(); ++i) values[i] = set.particles[i].weight;
  record.weight_variance = population_variance(values);

  if (config.resampling_enabled) systematic_resample(set, rng);

  // Survivors are exact copies, so their stored errors are still valid.
  for (std::size_t i = 0; i < set.size(); ++i) values[i] = set.particles[i].error;
  record.nu_after =
      std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(set.size());
  record.error_variance = population_variance(values);
  record.flat_l2_after =
      config.resampling_enabled ? mean_flat_l2(set, observation) : record.flat_l2_before;

  ++set.window_index;
  return record;
}

}  // namespace crowd_assim
