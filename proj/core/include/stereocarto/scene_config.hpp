#pragma once

// JSON scene documents:
//
// {
//   "sample_rate": 44100,
//   "duration_s": 10,
//   "mic": {"spacing_m": 0.17, "axis_half_angle_deg": 55,
//           "directivity": "cardioid", "sound_speed_mps": 343},
//   "render": {"control_rate_hz": 1000, "interpolator_half_width": 16},
//   "sources": [
//     {"name": "bass", "clip": "bass.wav", "gain_db": 0,
//      "trajectory": {"kind": "static", "distance_m": 1, "azimuth_deg": 45}},
//     {"clip": "organ.wav",
//      "trajectory": {"kind": "circle", "radius_m": 1, "start_azimuth_deg": 0,
//                     "angular_speed_deg_s": 36}},
//     {"clip": "voice.wav",
//      "trajectory": {"kind": "waypoints", "points": [
//        {"time_s": 0, "distance_m": 1, "azimuth_deg": -30},
//        {"time_s": 10, "distance_m": 1, "azimuth_deg": 30}]}}
//   ]
// }
//
// "mic", "render", "name" and "gain_db" are optional. Clip paths are
// relative to the document's directory.

#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "stereocarto/geometry.hpp"
#include "stereocarto/renderer.hpp"

namespace stereocarto {

struct SceneDocument {
  Scene scene;
  RenderConfig render;
};

struct SceneLoadResult {
  std::optional<SceneDocument> document;  // empty when any diagnostic is an error
  std::vector<Violation> diagnostics;     // parse errors carry "line L, column C"
};

SceneLoadResult parse_scene(std::string_view json_text, const std::filesystem::path& base_dir);
SceneLoadResult load_scene(const std::filesystem::path& path);

}  // namespace stereocarto
