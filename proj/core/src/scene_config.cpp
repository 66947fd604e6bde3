#include "stereocarto/scene_config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "stereocarto/error.hpp"
#include "stereocarto/wav.hpp"

namespace stereocarto {
namespace {

using nlohmann::json;
using Severity = Violation::Severity;

std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

class Reader {
 public:
  explicit Reader(std::vector<Violation>& diagnostics) : diagnostics_(diagnostics) {}

  void error(const std::string& field, const std::string& message) {
    diagnostics_.push_back({Severity::error, field, message});
  }

  const json* child(const json& parent, const char* key, const std::string& field, bool required) {
    if (!parent.is_object()) return nullptr;
    auto it = parent.find(key);
    if (it == parent.end()) {
      if (required) error(field, "missing required field");
      return nullptr;
    }
    return &*it;
  }

  std::optional<double> number(const json& parent, const char* key, const std::string& field, bool required) {
    const json* v = child(parent, key, field, required);
    if (v == nullptr) return std::nullopt;
    if (!v->is_number()) {
      error(field, std::string("expected a number, got ") + v->type_name());
      return std::nullopt;
    }
    return v->get<double>();
  }

  std::optional<std::string> text(const json& parent, const char* key, const std::string& field, bool required) {
    const json* v = child(parent, key, field, required);
    if (v == nullptr) return std::nullopt;
    if (!v->is_string()) {
      error(field, std::string("expected a string, got ") + v->type_name());
      return std::nullopt;
    }
    return v->get<std::string>();
  }

 private:
  std::vector<Violation>& diagnostics_;
};

std::optional<SourcePosition> read_position(Reader& r, const json& node, const std::string& field) {
  auto d = r.number(node, "distance_m", field + ".distance_m", true);
  auto a = r.number(node, "azimuth_deg", field + ".azimuth_deg", true);
  if (!d || !a) return std::nullopt;
  return SourcePosition{*d, *a};
}

std::optional<Trajectory> read_trajectory(Reader& r, const json& node, const std::string& field) {
  if (!node.is_object()) {
    r.error(field, "expected an object");
    return std::nullopt;
  }
  const auto kind = r.text(node, "kind", field + ".kind", true);
  if (!kind) return std::nullopt;
  if (*kind == "static") {
    if (auto p = read_position(r, node, field)) return FixedPosition{*p};
    return std::nullopt;
  }
  if (*kind == "circle") {
    auto radius = r.number(node, "radius_m", field + ".radius_m", true);
    auto start = r.number(node, "start_azimuth_deg", field + ".start_azimuth_deg", false);
    auto speed = r.number(node, "angular_speed_deg_s", field + ".angular_speed_deg_s", true);
    if (!radius || !speed) return std::nullopt;
    return CircleMotion{*radius, start.value_or(0.0), *speed};
  }
  if (*kind == "waypoints") {
    const json* points = r.child(node, "points", field + ".points", true);
    if (points == nullptr) return std::nullopt;
    if (!points->is_array()) {
      r.error(field + ".points", "expected an array");
      return std::nullopt;
    }
    WaypointPath path;
    bool ok = true;
    for (std::size_t i = 0; i < points->size(); ++i) {
      const std::string item = field + ".points[" + std::to_string(i) + "]";
      auto t = r.number((*points)[i], "time_s", item + ".time_s", true);
      auto p = read_position(r, (*points)[i], item);
      if (!t || !p) {
        ok = false;
        continue;
      }
      path.points.push_back({*t, *p});
    }
    if (!ok) return std::nullopt;
    return path;
  }
  r.error(field + ".kind", "unknown trajectory kind \"" + *kind + "\" (expected static, circle or waypoints)");
  return std::nullopt;
}

}  // namespace

SceneLoadResult parse_scene(std::string_view json_text, const std::filesystem::path& base_dir) {
  SceneLoadResult result;
  auto& diags = result.diagnostics;

  json root;
  try {
    root = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    diags.push_back({Severity::error, "<document>", line_column(json_text, e.byte > 0 ? e.byte - 1 : 0) + ": " + e.what()});
    return result;
  }
  if (!root.is_object()) {
    diags.push_back({Severity::error, "<document>", "top level must be an object"});
    return result;
  }

  Reader r(diags);
  SceneDocument doc;
  Scene& scene = doc.scene;
  if (auto v = r.number(root, "sample_rate", "sample_rate", true)) scene.sample_rate = *v;
  if (auto v = r.number(root, "duration_s", "duration_s", true)) scene.duration_s = *v;

  if (const json* mic = r.child(root, "mic", "mic", false)) {
    if (!mic->is_object()) {
      r.error("mic", "expected an object");
    } else {
      if (auto v = r.number(*mic, "spacing_m", "mic.spacing_m", false)) scene.mic.capsule_spacing_m = *v;
      if (auto v = r.number(*mic, "axis_half_angle_deg", "mic.axis_half_angle_deg", false)) {
        scene.mic.axis_half_angle_deg = *v;
      }
      if (auto v = r.number(*mic, "sound_speed_mps", "mic.sound_speed_mps", false)) scene.mic.sound_speed_mps = *v;
      if (auto v = r.text(*mic, "directivity", "mic.directivity", false)) {
        if (*v == "cardioid") {
          scene.mic.directivity = Directivity::cardioid;
        } else if (*v == "omni") {
          scene.mic.directivity = Directivity::omni;
        } else {
          r.error("mic.directivity", "unknown directivity \"" + *v + "\" (expected cardioid or omni)");
        }
      }
    }
  }

  if (const json* render = r.child(root, "render", "render", false)) {
    if (auto v = r.number(*render, "control_rate_hz", "render.control_rate_hz", false)) doc.render.control_rate = *v;
    if (auto v = r.number(*render, "interpolator_half_width", "render.interpolator_half_width", false)) {
      if (*v != std::floor(*v) || *v < 1.0 || *v > 4096.0) {
        r.error("render.interpolator_half_width", "expected an integer in [1, 4096]");
      } else {
        doc.render.interpolator_half_width = static_cast<int>(*v);
      }
    }
  }
  doc.render.sample_rate = scene.sample_rate;

  const json* sources = r.child(root, "sources", "sources", true);
  if (sources != nullptr && !sources->is_array()) {
    r.error("sources", "expected an array");
  } else if (sources != nullptr) {
    for (std::size_t i = 0; i < sources->size(); ++i) {
      const json& node = (*sources)[i];
      const std::string field = "sources[" + std::to_string(i) + "]";
      if (!node.is_object()) {
        r.error(field, "expected an object");
        continue;
      }
      PointSource src;
      src.name = r.text(node, "name", field + ".name", false).value_or("source" + std::to_string(i + 1));
      if (auto gain_db = r.number(node, "gain_db", field + ".gain_db", false)) src.gain = std::pow(10.0, *gain_db / 20.0);
      if (auto clip = r.text(node, "clip", field + ".clip", true)) {
        const std::filesystem::path clip_path = base_dir / *clip;
        try {
          src.clip = to_mono(read_wav(clip_path));
        } catch (const Error& e) {
          r.error(field + ".clip", e.what());
        }
      }
      if (const json* traj = r.child(node, "trajectory", field + ".trajectory", true)) {
        if (auto t = read_trajectory(r, *traj, field + ".trajectory")) src.trajectory = std::move(*t);
      }
      scene.sources.push_back(std::move(src));
    }
  }

  if (has_errors(diags)) return result;
  auto violations = validate_scene(scene);
  diags.insert(diags.end(), violations.begin(), violations.end());
  if (!has_errors(diags)) result.document = std::move(doc);
  return result;
}

SceneLoadResult load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    SceneLoadResult result;
    result.diagnostics.push_back({Severity::error, "<document>", "cannot open " + path.string()});
    return result;
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scene(text.str(), path.parent_path());
}

}  // namespace stereocarto
