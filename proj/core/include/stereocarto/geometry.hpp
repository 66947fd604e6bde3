#pragma once

// Scene description and the free-field ORTF forward model.
//
// Coordinates are planar: x points straight ahead of the couple, y points
// toward the left capsule. Azimuths are in degrees, 0 = ahead, positive =
// toward the left, wrapped to (-180, 180].

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace stereocarto {

enum class Directivity { cardioid, omni };

struct MicPair {
  double capsule_spacing_m = 0.17;
  double axis_half_angle_deg = 55.0;  // left capsule aimed +angle, right aimed -angle
  Directivity directivity = Directivity::cardioid;
  double sound_speed_mps = 343.0;
};

struct SourcePosition {
  double distance_m = 1.0;
  double azimuth_deg = 0.0;
};

struct FixedPosition {
  SourcePosition position;
};

struct CircleMotion {
  double radius_m = 1.0;
  double start_azimuth_deg = 0.0;
  double angular_speed_deg_s = 0.0;  // signed, positive turns toward the left
};

struct Waypoint {
  double time_s = 0.0;
  SourcePosition position;
};

/// Linear interpolation between waypoints, clamped at both ends.
struct WaypointPath {
  std::vector<Waypoint> points;
};

using Trajectory = std::variant<FixedPosition, CircleMotion, WaypointPath>;

struct MonoClip {
  std::vector<double> samples;
  double sample_rate = 44100.0;
};

struct PointSource {
  std::string name;
  MonoClip clip;
  double gain = 1.0;  // linear
  Trajectory trajectory = FixedPosition{};
};

struct Scene {
  double sample_rate = 44100.0;
  double duration_s = 0.0;
  MicPair mic;
  std::vector<PointSource> sources;
};

/// Cues of a single point source. Positive delta_t: the left capsule hears
/// the wavefront first. Positive delta_e: the left capsule is louder
/// (20 log10 of the amplitude ratio).
struct InterchannelParams {
  double delta_t_s = 0.0;
  double delta_e_db = 0.0;
};

struct CapsuleResponse {
  double path_m = 0.0;     // source to capsule distance
  double amplitude = 0.0;  // directivity gain / path
};

struct CapsulePair {
  CapsuleResponse left;
  CapsuleResponse right;
};

struct Violation {
  enum class Severity { error, warning };
  Severity severity = Severity::error;
  std::string field;  // dotted path, e.g. "sources[1].trajectory.points"
  std::string message;
};

std::vector<Violation> validate_scene(const Scene& scene);
bool has_errors(std::span<const Violation> violations);

double wrap_azimuth_deg(double azimuth_deg);

/// Per-capsule path length and amplitude. Throws Error when the source sits
/// on a capsule.
CapsulePair capsule_responses(SourcePosition pos, const MicPair& mic);

InterchannelParams interchannel_params(SourcePosition pos, const MicPair& mic);

/// Position at time t (seconds, t >= 0).
SourcePosition trajectory_state_at(const Trajectory& trajectory, double t);

/// Search domain and weighting for locate_source. The residual is
/// (dt_err / delay_scale)^2 + (de_err / level_scale)^2.
struct LocateOptions {
  double r_min_m = 0.1;
  double r_max_m = 5.0;
  int distance_steps = 60;   // log-spaced
  int azimuth_steps = 180;   // uniform over (-90, 90)
  double delay_scale_s = 1e-3;
  double level_scale_db = 1.0;
};

struct LocateResult {
  SourcePosition position;
  double residual = 0.0;
  // Set when the cues barely depend on distance at the solution (the
  // frontal ridge where delta_t = delta_e = 0 for every r). The returned
  // distance is then arbitrary within the search range.
  bool distance_weakly_determined = false;
};

/// Numeric inverse of interchannel_params over the frontal half plane:
/// coarse grid search, then Levenberg-Marquardt refinement from the best
/// grid cells. Throws Error on an empty search domain or non-finite cues.
LocateResult locate_source(InterchannelParams params, const MicPair& mic,
                           const LocateOptions& options = {});

}  // namespace stereocarto
