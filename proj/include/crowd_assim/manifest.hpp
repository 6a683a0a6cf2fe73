#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "crowd_assim/config.hpp"

namespace crowd_assim {

inline constexpr const char* kArtifactVersion = "0.1.0";

/// Sidecar for an output file: `<out>.manifest.json`.
std::filesystem::path manifest_path(const std::filesystem::path& output);

/// Writes the full config snapshot, base seed, version, UTC timestamp,
/// command and output paths.
void write_manifest(const std::filesystem::path& output, const RunConfig& config,
                    const std::string& command, const std::vector<std::filesystem::path>& outputs);

/// True when a manifest next to `output` exists and records the same
/// command and config snapshot, so its rows can be reused.
bool manifest_matches(const std::filesystem::path& output, const RunConfig& config,
                      const std::string& command);

}  // namespace crowd_assim
