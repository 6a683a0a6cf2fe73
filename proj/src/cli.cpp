#include "crowd_assim/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <thread>

#include "crowd_assim/config.hpp"
#include "crowd_assim/csv_io.hpp"
#include "crowd_assim/errors.hpp"
#include "crowd_assim/experiment_suite.hpp"
#include "crowd_assim/manifest.hpp"
#include "crowd_assim/twin_harness.hpp"

namespace crowd_assim {

namespace {

struct Flags {
  std::optional<std::string> config_path;
  std::map<std::string, std::string> values;
  bool no_resample = false;
  bool full_grid = false;
  std::string out;
};

// Flags are collected as text and handed to the same parser as the file, so
// range errors read identically whichever way a value arrives.
void add_value(CLI::App& cmd, Flags& flags, const std::string& flag, const std::string& key,
               const std::string& help) {
  cmd.add_option_function<std::string>(
      flag, [&flags, key](const std::string& v) { flags.values[key] = v; }, help);
}

void add_common(CLI::App& cmd, Flags& flags, const std::string& default_out) {
  flags.out = default_out;
  cmd.add_option("--config", flags.config_path, "key=value config file");
  add_value(cmd, flags, "--agents", "agents", "number of agents");
  add_value(cmd, flags, "--seed", "seed", "base seed");
  add_value(cmd, flags, "--threads", "threads", "worker threads (env CROWD_ASSIM_THREADS)");
  cmd.add_option("--out", flags.out, "output CSV path")->capture_default_str();
}

void add_filter_flags(CLI::App& cmd, Flags& flags) {
  add_value(cmd, flags, "--particles", "particles", "number of particles");
  add_value(cmd, flags, "--particle-noise", "particle_noise", "roughening sigma");
  add_value(cmd, flags, "--measurement-noise", "measurement_noise", "observation sigma");
  add_value(cmd, flags, "--window", "window", "iterations per assimilation window");
  cmd.add_flag("--no-resample", flags.no_resample, "disable resampling");
}

unsigned resolve_threads(const RunConfig& config) {
  if (config.threads > 0) return config.threads;
  if (const char* env = std::getenv("CROWD_ASSIM_THREADS")) {
    RunConfig probe;
    apply_setting(probe, "threads", env);
    return probe.threads;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

RunConfig build_config(const Flags& flags) {
  std::vector<Setting> overrides(flags.values.begin(), flags.values.end());
  if (flags.no_resample) overrides.emplace_back("resample", "false");
  if (flags.full_grid) overrides.emplace_back("full_grid", "true");
  return load_config(flags.config_path, overrides);
}

void ensure_parent(const std::filesystem::path& out) {
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
}

int run_simulate(const RunConfig& config, const std::filesystem::path& out, std::ostream& log) {
  ensure_parent(out);
  write_manifest(out, config, "simulate", {out});
  ModelState state = build_model(config.model, config.seed);
  Rng behaviour = make_rng(derive_seed(config.seed, {key(Stream::kBehaviour)}));
  TrajectoryWriter writer(out);
  writer.write(state);
  while (!is_done(state) && state.iteration < config.model.iteration_cap) {
    step(state, behaviour);
    writer.write(state);
  }
  writer.close();
  log << "simulate: " << state.iteration << " iterations, " << state.collision_count
      << " collisions" << (is_done(state) ? "" : " (iteration cap reached)") << '\n';
  return 0;
}

int run_filter(const RunConfig& config, const std::filesystem::path& out, unsigned threads,
               std::ostream& log) {
  ensure_parent(out);
  write_manifest(out, config, "filter", {out});
  const CellKey cell{config.model.n_agents, config.filter.n_particles,
                     config.filter.particle_noise_sigma};
  const ExperimentResult result =
      run_filter_experiment(config.model, config.filter, truth_seed_for(config.seed, cell.n_agents, 0),
                            filter_seed_for(config.seed, cell, 0), threads);
  write_window_csv(result.windows, out);
  log << "filter: " << result.windows.size() << " windows, truth ran "
      << result.truth_iterations << " iterations"
      << (result.cap_reached ? " (iteration cap reached)" : "") << '\n';
  return 0;
}

int run_sweep(const RunConfig& config, const std::filesystem::path& out, unsigned threads,
              std::ostream& log) {
  ensure_parent(out);
  const GridSpec spec = config.sweep_grid();

  std::vector<CellResult> kept;
  if (std::filesystem::exists(out) && manifest_matches(out, config, "sweep")) {
    kept = read_grid_csv(out);
    log << "sweep: resuming, " << kept.size() << " cells already present\n";
  }
  write_manifest(out, config, "sweep", {out});

  // Rows are appended as cells finish so an interrupted sweep can resume;
  // the file is rewritten in key order at the end.
  write_grid_csv(kept, out);
  std::FILE* append = std::fopen(out.string().c_str(), "ab");
  if (!append) throw std::runtime_error("cannot open '" + out.string() + "' for appending");

  GridOptions options;
  options.threads = threads;
  for (const auto& c : kept) options.completed.push_back(c.key);
  const std::size_t total = spec.agent_counts.size() * spec.particle_counts.size() * spec.noise_levels.size();
  std::size_t done = kept.size();
  options.on_cell = [&](const CellResult& c) {
    std::fputs((grid_row(c) + '\n').c_str(), append);
    std::fflush(append);
    ++done;
    log << "sweep: cell " << done << "/" << total << " agents=" << c.key.n_agents
        << " particles=" << c.key.n_particles << " sigma_p=" << format_real(c.key.sigma_p)
        << (c.failure ? " FAILED: " + *c.failure : "") << '\n';
  };
  std::vector<CellResult> fresh;
  try {
    fresh = run_grid(spec, config.model, config.filter, config.seed, options);
  } catch (...) {
    std::fclose(append);
    throw;
  }
  std::fclose(append);

  fresh.insert(fresh.end(), kept.begin(), kept.end());
  std::sort(fresh.begin(), fresh.end(),
            [](const CellResult& a, const CellResult& b) { return a.key < b.key; });
  write_grid_csv(fresh, out);
  log << "sweep: wrote " << fresh.size() << " rows to " << out.string() << '\n';
  return 0;
}

int run_collisions(const RunConfig& config, const std::filesystem::path& out, unsigned threads,
                   const std::optional<std::string>& agents_flag, std::ostream& log) {
  ensure_parent(out);
  write_manifest(out, config, "collisions", {out});
  std::vector<std::size_t> counts = config.collision_agents;
  if (agents_flag) counts = {config.model.n_agents};
  const CollisionStudy study =
      collision_study(config.model, counts, config.collision_seeds, config.seed, threads);
  write_collision_csv(study, out);
  log << "collisions: linear R2 " << format_real(study.linear.r_squared) << ", quadratic R2 "
      << format_real(study.quadratic.r_squared) << '\n';
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Particle filter data assimilation for a station crowd model", "crowd-assim"};
  app.require_subcommand(1, 1);

  Flags sim_flags, filter_flags, sweep_flags, coll_flags;
  auto* simulate = app.add_subcommand("simulate", "bare truth run, trajectory CSV");
  add_common(*simulate, sim_flags, "trajectory.csv");

  auto* filter = app.add_subcommand("filter", "single twin experiment, window CSV");
  add_common(*filter, filter_flags, "windows.csv");
  add_filter_flags(*filter, filter_flags);

  auto* sweep = app.add_subcommand("sweep", "parameter grid, grid CSV");
  add_common(*sweep, sweep_flags, "grid.csv");
  add_filter_flags(*sweep, sweep_flags);
  add_value(*sweep, sweep_flags, "--reps", "reps", "repetitions per cell");
  sweep->add_flag("--full-grid", sweep_flags.full_grid, "use the full parameter ranges");

  auto* collisions = app.add_subcommand("collisions", "collision counts against agent count");
  add_common(*collisions, coll_flags, "collisions.csv");
  add_value(*collisions, coll_flags, "--seeds", "collision_seeds", "seeds per agent count");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (simulate->parsed()) {
      const RunConfig config = build_config(sim_flags);
      return run_simulate(config, sim_flags.out, err);
    }
    if (filter->parsed()) {
      const RunConfig config = build_config(filter_flags);
      return run_filter(config, filter_flags.out, resolve_threads(config), err);
    }
    if (sweep->parsed()) {
      const RunConfig config = build_config(sweep_flags);
      return run_sweep(config, sweep_flags.out, resolve_threads(config), err);
    }
    const RunConfig config = build_config(coll_flags);
    std::optional<std::string> agents_flag;
    if (auto it = coll_flags.values.find("agents"); it != coll_flags.values.end()) {
      agents_flag = it->second;
    }
    return run_collisions(config, coll_flags.out, resolve_threads(config), agents_flag, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace crowd_assim
