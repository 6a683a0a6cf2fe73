#include "crowd_assim/twin_harness.hpp"

#include <string>

#include "crowd_assim/errors.hpp"

namespace crowd_assim {

namespace {

// Advances the truth by at most `length` iterations; returns how many ran.
std::int64_t advance_truth(ModelState& truth, Rng& behaviour, std::int64_t length) {
  const std::int64_t cap = truth.config->iteration_cap;
  std::int64_t ran = 0;
  while (ran < length && !is_done(truth) && truth.iteration < cap) {
    step(truth, behaviour);
    ++ran;
  }
  return ran;
}

bool truth_over(const ModelState& truth) {
  return is_done(truth) || truth.iteration >= truth.config->iteration_cap;
}

}  // namespace

TruthRun run_truth(const ModelConfig& config, std::uint64_t seed, std::int64_t window_length) {
  if (window_length < 1) throw ConfigError("window must be at least 1");
  ModelState truth = build_model(config, seed);
  Rng behaviour = make_rng(derive_seed(seed, {key(Stream::kBehaviour)}));

  TruthRun run;
  run.config = config;
  run.truth_seed = seed;
  while (!truth_over(truth)) {
    advance_truth(truth, behaviour, window_length);
    run.states_by_window.push_back(partial_state(truth));
    run.window_iterations.push_back(truth.iteration);
  }
  run.total_iterations = truth.iteration;
  run.collision_count = truth.collision_count;
  run.cap_reached = !is_done(truth);
  return run;
}

PartialState observe(std::span<const double> truth, double sigma_m, Rng& rng) {
  PartialState out(truth.begin(), truth.end());
  if (sigma_m <= 0.0) return out;
  std::normal_distribution<double> noise(0.0, sigma_m);
  for (double& v : out) v += noise(rng);
  return out;
}

ExperimentResult run_filter_experiment(const ModelConfig& config, const FilterConfig& filter,
                                       std::uint64_t truth_seed, std::uint64_t filter_seed,
                                       unsigned threads) {
  filter.validate();
  ModelState truth = build_model(config, truth_seed);
  Rng behaviour = make_rng(derive_seed(truth_seed, {key(Stream::kBehaviour)}));
  Rng sensor = make_rng(derive_seed(truth_seed, {key(Stream::kObservation)}));
  Rng resampler = make_rng(derive_seed(filter_seed, {key(Stream::kResample)}));

  // Particles start from the truth's initial state: all agents waiting at
  // known entrances with known parameters.
  ParticleSet set = make_particle_set(truth, filter.n_particles);

  ExperimentResult result;
  while (!truth_over(truth)) {
    const std::int64_t length = advance_truth(truth, behaviour, filter.window_length);
    predict(set, length, filter, filter_seed, threads);
    const PartialState observation =
        observe(partial_state(truth), filter.measurement_noise_sigma, sensor);

    WindowRecord record;
    try {
      record = assimilation_step(set, observation, filter, resampler);
    } catch (const DegeneracyError& e) {
      throw DegeneracyError("window " + std::to_string(set.window_index) + ": " + e.what());
    }
    record.iteration = truth.iteration;
    record.length = length;
    record.active_agents = truth.count(AgentStatus::kActive);
    result.windows.push_back(record);
  }
  result.truth_iterations = truth.iteration;
  result.truth_collisions = truth.collision_count;
  result.cap_reached = !is_done(truth);
  return result;
}

}  // namespace crowd_assim
