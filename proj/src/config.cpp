#include "crowd_assim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "crowd_assim/csv_io.hpp"
#include "crowd_assim/errors.hpp"

namespace crowd_assim {

namespace {

std::string trim(const std::string& s) {
  const auto first = std::find_if_not(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
  const auto last = std::find_if_not(s.rbegin(), s.rend(), [](unsigned char c) { return std::isspace(c); }).base();
  return first < last ? std::string(first, last) : std::string();
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& why) {
  throw ConfigError(key + ": " + why + " (got '" + value + "')");
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  T out{};
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size() || v.empty()) {
    bad_value(key, value, "not a valid number");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& value, double lo) {
  const double v = parse_number<double>(key, value);
  if (!std::isfinite(v) || v < lo) bad_value(key, value, "must be a finite value >= " + format_real(lo));
  return v;
}

std::size_t parse_count(const std::string& key, const std::string& value, std::size_t lo) {
  if (trim(value).starts_with('-')) bad_value(key, value, "must be non-negative");
  const auto v = parse_number<std::uint64_t>(key, value);
  if (v < lo) bad_value(key, value, "must be at least " + std::to_string(lo));
  return static_cast<std::size_t>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
  std::string v = trim(value);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  bad_value(key, value, "expected true or false");
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& key, const std::string& value, Parse parse) {
  std::vector<T> out;
  std::stringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse(key, item));
  if (out.empty()) bad_value(key, value, "list must not be empty");
  return out;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += format_real(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

using Applier = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Applier>& appliers() {
  static const std::map<std::string, Applier> table = {
      {"agents", [](RunConfig& c, const auto& k, const auto& v) { c.model.n_agents = parse_count(k, v, 1); }},
      {"particles", [](RunConfig& c, const auto& k, const auto& v) { c.filter.n_particles = parse_count(k, v, 1); }},
      {"particle_noise", [](RunConfig& c, const auto& k, const auto& v) { c.filter.particle_noise_sigma = parse_real(k, v, 0.0); }},
      {"measurement_noise", [](RunConfig& c, const auto& k, const auto& v) {
         c.filter.measurement_noise_sigma = parse_real(k, v, 0.0);
         c.grid.measurement_sigma = c.filter.measurement_noise_sigma;
       }},
      {"window", [](RunConfig& c, const auto& k, const auto& v) {
         c.filter.window_length = static_cast<std::int64_t>(parse_count(k, v, 1));
         c.grid.window_length = c.filter.window_length;
       }},
      {"reps", [](RunConfig& c, const auto& k, const auto& v) { c.reps = parse_count(k, v, 1); }},
      {"seed", [](RunConfig& c, const auto& k, const auto& v) { c.seed = parse_count(k, v, 0); }},
      {"resample", [](RunConfig& c, const auto& k, const auto& v) { c.filter.resampling_enabled = parse_bool(k, v); }},
      {"weighting", [](RunConfig& c, const auto& k, const auto& v) {
         const std::string s = trim(v);
         if (s == "gaussian") c.filter.weighting = Weighting::kGaussianLikelihood;
         else if (s == "mean_distance") c.filter.weighting = Weighting::kGaussianMeanDistance;
         else if (s == "inverse") c.filter.weighting = Weighting::kInverseDistance;
         else bad_value(k, v, "expected gaussian, mean_distance or inverse");
       }},
      {"roughening", [](RunConfig& c, const auto& k, const auto& v) {
         const std::string s = trim(v);
         if (s == "window") c.filter.roughening = Roughening::kPerWindow;
         else if (s == "iteration") c.filter.roughening = Roughening::kPerIteration;
         else bad_value(k, v, "expected window or iteration");
       }},
      {"threads", [](RunConfig& c, const auto& k, const auto& v) { c.threads = static_cast<unsigned>(parse_count(k, v, 1)); }},
      {"width", [](RunConfig& c, const auto& k, const auto& v) { c.model.geometry.width = parse_real(k, v, 0.0); }},
      {"height", [](RunConfig& c, const auto& k, const auto& v) { c.model.geometry.height = parse_real(k, v, 0.0); }},
      {"speed_min", [](RunConfig& c, const auto& k, const auto& v) { c.model.speed_min = parse_real(k, v, 0.0); }},
      {"speed_max", [](RunConfig& c, const auto& k, const auto& v) { c.model.speed_max = parse_real(k, v, 0.0); }},
      {"gate_interval", [](RunConfig& c, const auto& k, const auto& v) { c.model.gate_interval = static_cast<int>(parse_count(k, v, 1)); }},
      {"separation", [](RunConfig& c, const auto& k, const auto& v) { c.model.separation = parse_real(k, v, 0.0); }},
      {"iteration_cap", [](RunConfig& c, const auto& k, const auto& v) { c.model.iteration_cap = static_cast<std::int64_t>(parse_count(k, v, 1)); }},
      {"entrance_capacity", [](RunConfig& c, const auto& k, const auto& v) { c.model.geometry.entrance_capacity = static_cast<int>(parse_count(k, v, 1)); }},
      {"grid_agents", [](RunConfig& c, const auto& k, const auto& v) {
         c.grid.agent_counts = parse_list<std::size_t>(k, v, [](const auto& kk, const auto& x) { return parse_count(kk, x, 1); });
       }},
      {"grid_particles", [](RunConfig& c, const auto& k, const auto& v) {
         c.grid.particle_counts = parse_list<std::size_t>(k, v, [](const auto& kk, const auto& x) { return parse_count(kk, x, 1); });
       }},
      {"grid_noise", [](RunConfig& c, const auto& k, const auto& v) {
         c.grid.noise_levels = parse_list<double>(k, v, [](const auto& kk, const auto& x) { return parse_real(kk, x, 0.0); });
       }},
      {"collision_agents", [](RunConfig& c, const auto& k, const auto& v) {
         c.collision_agents = parse_list<std::size_t>(k, v, [](const auto& kk, const auto& x) { return parse_count(kk, x, 1); });
       }},
      {"collision_seeds", [](RunConfig& c, const auto& k, const auto& v) { c.collision_seeds = parse_count(k, v, 1); }},
      {"full_grid", [](RunConfig& c, const auto& k, const auto& v) { c.full_grid = parse_bool(k, v); }},
  };
  return table;
}

}  // namespace

GridSpec RunConfig::sweep_grid() const {
  GridSpec spec = grid;
  if (full_grid) {
    const GridSpec full = GridSpec::full_scale();
    spec.agent_counts = full.agent_counts;
    spec.particle_counts = full.particle_counts;
    spec.noise_levels = full.noise_levels;
  }
  spec.repetitions = reps ? *reps : (full_grid ? 20 : 5);
  return spec;
}

void RunConfig::validate() const {
  model.validate();
  filter.validate();
  sweep_grid().validate();
  if (collision_agents.empty()) throw ConfigError("collision_agents must not be empty");
  if (collision_seeds < 1) throw ConfigError("collision_seeds must be at least 1");
}

std::vector<Setting> parse_settings(const std::string& text, const std::string& source) {
  std::vector<Setting> out;
  std::stringstream in(text);
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(number) + ": expected key=value");
    }
    const std::string k = trim(t.substr(0, eq));
    if (k.empty()) throw ConfigError(source + ":" + std::to_string(number) + ": empty key");
    out.emplace_back(k, trim(t.substr(eq + 1)));
  }
  return out;
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  const auto& table = appliers();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second(config, key, value);
}

RunConfig load_config(const std::optional<std::string>& path, const std::vector<Setting>& overrides) {
  RunConfig config;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("config: cannot open '" + *path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    for (const auto& [k, v] : parse_settings(buffer.str(), *path)) apply_setting(config, k, v);
  }
  for (const auto& [k, v] : overrides) apply_setting(config, k, v);
  if (config.reps) config.grid.repetitions = *config.reps;
  config.validate();
  return config;
}

std::vector<Setting> config_snapshot(const RunConfig& c) {
  const GridSpec sweep = c.sweep_grid();
  return {
      {"agents", std::to_string(c.model.n_agents)},
      {"particles", std::to_string(c.filter.n_particles)},
      {"particle_noise", format_real(c.filter.particle_noise_sigma)},
      {"measurement_noise", format_real(c.filter.measurement_noise_sigma)},
      {"window", std::to_string(c.filter.window_length)},
      {"reps", std::to_string(sweep.repetitions)},
      {"seed", std::to_string(c.seed)},
      {"resample", c.filter.resampling_enabled ? "true" : "false"},
      {"weighting", weighting_name(c.filter.weighting)},
      {"roughening", roughening_name(c.filter.roughening)},
      {"width", format_real(c.model.geometry.width)},
      {"height", format_real(c.model.geometry.height)},
      {"speed_min", format_real(c.model.speed_min)},
      {"speed_max", format_real(c.model.speed_max)},
      {"gate_interval", std::to_string(c.model.gate_interval)},
      {"separation", format_real(c.model.separation)},
      {"iteration_cap", std::to_string(c.model.iteration_cap)},
      {"entrance_capacity", std::to_string(c.model.geometry.entrance_capacity)},
      {"grid_agents", join(sweep.agent_counts)},
      {"grid_particles", join(sweep.particle_counts)},
      {"grid_noise", join(sweep.noise_levels)},
      {"collision_agents", join(c.collision_agents)},
      {"collision_seeds", std::to_string(c.collision_seeds)},
      {"full_grid", c.full_grid ? "true" : "false"},
  };
}

std::string weighting_name(Weighting w) {
  switch (w) {
    case Weighting::kGaussianLikelihood: return "gaussian";
    case Weighting::kGaussianMeanDistance: return "mean_distance";
    case Weighting::kInverseDistance: return "inverse";
  }
  return "unknown";
}

std::string roughening_name(Roughening r) {
  return r == Roughening::kPerWindow ? "window" : "iteration";
}

}  // namespace crowd_assim
