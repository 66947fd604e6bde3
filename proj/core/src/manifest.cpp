#include "stereocarto/manifest.hpp"

#include <json.hpp>

#include "stereocarto/csv_export.hpp"

namespace stereocarto {

const char* tool_version() { return STEREOCARTO_VERSION; }

std::string format_manifest(const RunManifest& manifest) {
  nlohmann::ordered_json doc;
  doc["tool"] = "stereocarto";
  doc["version"] = tool_version();
  doc["command"] = manifest.command;
  doc["inputs"] = manifest.inputs;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  for (const auto& [key, value] : manifest.config) {
    std::visit([&, &k = key](const auto& v) { config[k] = v; }, value);
  }
  doc["config"] = config;
  doc["outputs"] = manifest.outputs;
  return doc.dump(2) + "\n";
}

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
  write_text(path, format_manifest(manifest));
}

}  // namespace stereocarto
