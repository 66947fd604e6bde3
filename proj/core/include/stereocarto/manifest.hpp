#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace stereocarto {

using ConfigValue = std::variant<bool, long long, double, std::string>;

/// Determinism manifest persisted as run.json next to a command's outputs.
/// Carries no timestamps, so rerunning a command rewrites it byte for byte.
struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  std::vector<std::pair<std::string, ConfigValue>> config;
  std::vector<std::string> outputs;
};

const char* tool_version();

std::string format_manifest(const RunManifest& manifest);
void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

}  // namespace stereocarto
