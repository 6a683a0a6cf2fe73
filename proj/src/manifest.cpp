#include "crowd_assim/manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace crowd_assim {

namespace {

nlohmann::ordered_json snapshot_json(const RunConfig& config) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config_snapshot(config)) out[k] = v;
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::filesystem::path manifest_path(const std::filesystem::path& output) {
  return std::filesystem::path(output.string() + ".manifest.json");
}

void write_manifest(const std::filesystem::path& output, const RunConfig& config,
                    const std::string& command, const std::vector<std::filesystem::path>& outputs) {
  nlohmann::ordered_json doc;
  doc["version"] = kArtifactVersion;
  doc["command"] = command;
  doc["base_seed"] = config.seed;
  doc["timestamp"] = utc_timestamp();
  doc["config"] = snapshot_json(config);
  doc["outputs"] = nlohmann::ordered_json::array();
  for (const auto& p : outputs) doc["outputs"].push_back(p.string());

  const auto path = manifest_path(output);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

bool manifest_matches(const std::filesystem::path& output, const RunConfig& config,
                      const std::string& command) {
  std::ifstream in(manifest_path(output), std::ios::binary);
  if (!in) return false;
  const auto doc = nlohmann::ordered_json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return false;
  return doc.value("command", "") == command && doc.contains("config") &&
         doc["config"] == snapshot_json(config);
}

}  // namespace crowd_assim
