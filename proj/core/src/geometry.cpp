#include "stereocarto/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "stereocarto/error.hpp"

namespace stereocarto {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double directivity_gain(Directivity directivity, double off_axis_rad) {
  switch (directivity) {
    case Directivity::cardioid:
      return 0.5 * (1.0 + std::cos(off_axis_rad));
    case Directivity::omni:
      return 1.0;
  }
  return 1.0;
}

CapsuleResponse capsule_response(double source_x, double source_y, double capsule_y,
                                 double axis_rad, const MicPair& mic) {
  const double dx = source_x;
  const double dy = source_y - capsule_y;
  const double path = std::hypot(dx, dy);
  if (!(path > 1e-9 * mic.capsule_spacing_m)) {
    throw Error("source position coincides with a capsule");
  }
  const double off_axis = std::atan2(dy, dx) - axis_rad;
  return {path, directivity_gain(mic.directivity, off_axis) / path};
}

void check_position(const SourcePosition& pos, const std::string& field,
                    std::vector<Violation>& out) {
  if (!(pos.distance_m > 0.0) || !std::isfinite(pos.distance_m)) {
    out.push_back({Violation::Severity::error, field + ".distance_m", "distance must be > 0"});
  }
  if (!std::isfinite(pos.azimuth_deg) || pos.azimuth_deg <= -180.0 || pos.azimuth_deg > 180.0) {
    out.push_back(
        {Violation::Severity::error, field + ".azimuth_deg", "azimuth must lie in (-180, 180]"});
  }
}

struct TrajectoryChecker {
  const std::string& field;
  std::vector<Violation>& out;

  void operator()(const FixedPosition& fixed) const { check_position(fixed.position, field, out); }

  void operator()(const CircleMotion& circle) const {
    if (!(circle.radius_m > 0.0) || !std::isfinite(circle.radius_m)) {
      out.push_back({Violation::Severity::error, field + ".radius_m", "circle radius must be > 0"});
    }
    if (!std::isfinite(circle.start_azimuth_deg)) {
      out.push_back({Violation::Severity::error, field + ".start_azimuth_deg",
                     "start azimuth must be finite"});
    }
    if (!std::isfinite(circle.angular_speed_deg_s)) {
      out.push_back({Violation::Severity::error, field + ".angular_speed_deg_s",
                     "angular speed must be finite"});
    }
  }

  void operator()(const WaypointPath& path) const {
    if (path.points.empty()) {
      out.push_back({Violation::Severity::error, field + ".points", "waypoint list is empty"});
      return;
    }
    for (std::size_t i = 0; i < path.points.size(); ++i) {
      const std::string item = field + ".points[" + std::to_string(i) + "]";
      check_position(path.points[i].position, item, out);
      if (!std::isfinite(path.points[i].time_s) || path.points[i].time_s < 0.0) {
        out.push_back({Violation::Severity::error, item + ".time_s", "time must be finite and >= 0"});
      }
      if (i > 0 && !(path.points[i].time_s > path.points[i - 1].time_s)) {
        out.push_back({Violation::Severity::error, item + ".time_s",
                       "non-increasing times: waypoint times must be strictly increasing"});
      }
    }
  }
};

// Cue residual in scaled units; nullopt where the forward model is singular.
std::optional<std::array<double, 2>> cue_error(double r, double az, const InterchannelParams& target,
                                               const MicPair& mic, const LocateOptions& opt) {
  try {
    const auto p = interchannel_params({r, az}, mic);
    return std::array<double, 2>{(p.delta_t_s - target.delta_t_s) / opt.delay_scale_s,
                                 (p.delta_e_db - target.delta_e_db) / opt.level_scale_db};
  } catch (const Error&) {
    return std::nullopt;
  }
}

double squared_norm(const std::array<double, 2>& v) { return v[0] * v[0] + v[1] * v[1]; }

struct Refined {
  double r;
  double az;
  double residual;
  double distance_sensitivity;  // |d cues / d r| in scaled units per meter
};

Refined refine(double r, double az, const InterchannelParams& target, const MicPair& mic,
               const LocateOptions& opt) {
  const double az_lo = -90.0;
  const double az_hi = 90.0;
  auto clamp_r = [&](double v) { return std::clamp(v, opt.r_min_m, opt.r_max_m); };
  auto clamp_az = [&](double v) { return std::clamp(v, az_lo, az_hi); };

  auto residual_at = [&](double rr, double aa) {
    const auto e = cue_error(rr, aa, target, mic, opt);
    return e ? squared_norm(*e) : std::numeric_limits<double>::infinity();
  };

  // Central differences, one-sided against the bounds.
  auto jacobian = [&](double rr, double aa, std::array<double, 2>& col_r,
                      std::array<double, 2>& col_az) -> bool {
    const double hr = 1e-6 * std::max(rr, 1e-3);
    const double ha = 1e-5;
    const double r_plus = clamp_r(rr + hr), r_minus = clamp_r(rr - hr);
    const double a_plus = clamp_az(aa + ha), a_minus = clamp_az(aa - ha);
    const auto fr1 = cue_error(r_plus, aa, target, mic, opt);
    const auto fr0 = cue_error(r_minus, aa, target, mic, opt);
    const auto fa1 = cue_error(rr, a_plus, target, mic, opt);
    const auto fa0 = cue_error(rr, a_minus, target, mic, opt);
    if (!fr1 || !fr0 || !fa1 || !fa0) return false;
    for (int k = 0; k < 2; ++k) {
      col_r[k] = ((*fr1)[k] - (*fr0)[k]) / (r_plus - r_minus);
      col_az[k] = ((*fa1)[k] - (*fa0)[k]) / (a_plus - a_minus);
    }
    return true;
  };

  double current = residual_at(r, az);
  double lambda = 1e-3;
  std::array<double, 2> jr{}, ja{};
  bool stalled = false;
  for (int iter = 0; iter < 200 && current > 1e-28 && !stalled; ++iter) {
    const auto f = cue_error(r, az, target, mic, opt);
    if (!f || !jacobian(r, az, jr, ja)) break;
    // Normal equations of the 2x2 Gauss-Newton step, damped.
    const double a11 = jr[0] * jr[0] + jr[1] * jr[1];
    const double a22 = ja[0] * ja[0] + ja[1] * ja[1];
    const double a12 = jr[0] * ja[0] + jr[1] * ja[1];
    const double g1 = jr[0] * (*f)[0] + jr[1] * (*f)[1];
    const double g2 = ja[0] * (*f)[0] + ja[1] * (*f)[1];

    bool accepted = false;
    for (int attempt = 0; attempt < 30; ++attempt) {
      const double d11 = a11 * (1.0 + lambda) + 1e-30;
      const double d22 = a22 * (1.0 + lambda) + 1e-30;
      const double det = d11 * d22 - a12 * a12;
      if (!(std::abs(det) > 0.0)) {
        lambda *= 10.0;
        continue;
      }
      const double step_r = -(d22 * g1 - a12 * g2) / det;
      const double step_az = -(d11 * g2 - a12 * g1) / det;
      const double r_new = clamp_r(r + step_r);
      const double az_new = clamp_az(az + step_az);
      const double trial = residual_at(r_new, az_new);
      if (trial < current) {
        const double moved = std::abs(r_new - r) + std::abs(az_new - az) * 1e-2;
        r = r_new;
        az = az_new;
        current = trial;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        stalled = moved < 1e-15;
        break;
      }
      lambda *= 4.0;
    }
    if (!accepted) break;
  }

  double sensitivity = 0.0;
  if (jacobian(r, az, jr, ja)) sensitivity = std::hypot(jr[0], jr[1]);
  return {r, az, current, sensitivity};
}

}  // namespace

bool has_errors(std::span<const Violation> violations) {
  return std::any_of(violations.begin(), violations.end(),
                     [](const Violation& v) { return v.severity == Violation::Severity::error; });
}

double wrap_azimuth_deg(double azimuth_deg) {
  double a = std::fmod(azimuth_deg, 360.0);
  if (a <= -180.0) a += 360.0;
  if (a > 180.0) a -= 360.0;
  return a;
}

std::vector<Violation> validate_scene(const Scene& scene) {
  std::vector<Violation> out;
  using S = Violation::Severity;

  if (!(scene.sample_rate > 0.0) || !std::isfinite(scene.sample_rate)) {
    out.push_back({S::error, "sample_rate", "sample rate must be > 0"});
  }
  if (!(scene.duration_s > 0.0) || !std::isfinite(scene.duration_s)) {
    out.push_back({S::error, "duration_s", "duration must be > 0"});
  }

  const MicPair& mic = scene.mic;
  if (!(mic.capsule_spacing_m > 0.0) || !std::isfinite(mic.capsule_spacing_m)) {
    out.push_back({S::error, "mic.spacing_m", "capsule spacing must be > 0"});
  }
  if (!(mic.axis_half_angle_deg >= 0.0 && mic.axis_half_angle_deg < 90.0)) {
    out.push_back({S::error, "mic.axis_half_angle_deg", "axis half angle must lie in [0, 90)"});
  }
  if (!(mic.sound_speed_mps > 0.0) || !std::isfinite(mic.sound_speed_mps)) {
    out.push_back({S::error, "mic.sound_speed_mps", "sound speed must be > 0"});
  }

  if (scene.sources.empty()) {
    out.push_back({S::error, "sources", "scene has no sources"});
  }

  for (std::size_t i = 0; i < scene.sources.size(); ++i) {
    const PointSource& src = scene.sources[i];
    const std::string field = "sources[" + std::to_string(i) + "]";
    if (src.clip.samples.empty()) {
      out.push_back({S::error, field + ".clip", "clip is empty"});
    }
    if (src.clip.sample_rate != scene.sample_rate) {
      out.push_back({S::error, field + ".clip",
                     "clip sample rate " + std::to_string(src.clip.sample_rate) +
                         " differs from scene sample rate " + std::to_string(scene.sample_rate)});
    } else if (!src.clip.samples.empty() && scene.duration_s > 0.0) {
      const double clip_s = static_cast<double>(src.clip.samples.size()) / src.clip.sample_rate;
      if (clip_s < scene.duration_s) {
        out.push_back({S::warning, field + ".clip",
                       "clip is shorter than the scene and will be zero-padded"});
      }
    }
    if (!(src.gain >= 0.0) || !std::isfinite(src.gain)) {
      out.push_back({S::error, field + ".gain", "gain must be finite and >= 0"});
    }
    std::visit(TrajectoryChecker{field + ".trajectory", out}, src.trajectory);

    if (const auto* fixed = std::get_if<FixedPosition>(&src.trajectory);
        fixed != nullptr && !has_errors(out)) {
      try {
        capsule_responses(fixed->position, mic);
      } catch (const Error& e) {
        out.push_back({S::error, field + ".trajectory", e.what()});
      }
    }
  }
  return out;
}

CapsulePair capsule_responses(SourcePosition pos, const MicPair& mic) {
  const double az = pos.azimuth_deg * kDegToRad;
  const double x = pos.distance_m * std::cos(az);
  const double y = pos.distance_m * std::sin(az);
  const double half = 0.5 * mic.capsule_spacing_m;
  const double axis = mic.axis_half_angle_deg * kDegToRad;
  return {capsule_response(x, y, +half, +axis, mic), capsule_response(x, y, -half, -axis, mic)};
}

InterchannelParams interchannel_params(SourcePosition pos, const MicPair& mic) {
  const CapsulePair caps = capsule_responses(pos, mic);
  InterchannelParams out;
  out.delta_t_s = (caps.right.path_m - caps.left.path_m) / mic.sound_speed_mps;
  out.delta_e_db = 20.0 * std::log10(caps.left.amplitude / caps.right.amplitude);
  return out;
}

SourcePosition trajectory_state_at(const Trajectory& trajectory, double t) {
  struct Visitor {
    double t;
    SourcePosition operator()(const FixedPosition& fixed) const { return fixed.position; }
    SourcePosition operator()(const CircleMotion& c) const {
      return {c.radius_m, wrap_azimuth_deg(c.start_azimuth_deg + c.angular_speed_deg_s * t)};
    }
    SourcePosition operator()(const WaypointPath& path) const {
      const auto& pts = path.points;
      if (pts.empty()) throw Error("waypoint trajectory has no points");
      if (t <= pts.front().time_s) return pts.front().position;
      if (t >= pts.back().time_s) return pts.back().position;
      auto upper = std::upper_bound(pts.begin(), pts.end(), t,
                                    [](double v, const Waypoint& w) { return v < w.time_s; });
      const Waypoint& b = *upper;
      const Waypoint& a = *(upper - 1);
      const double u = (t - a.time_s) / (b.time_s - a.time_s);
      return {a.position.distance_m + u * (b.position.distance_m - a.position.distance_m),
              wrap_azimuth_deg(a.position.azimuth_deg +
                               u * (b.position.azimuth_deg - a.position.azimuth_deg))};
    }
  };
  return std::visit(Visitor{t}, trajectory);
}

LocateResult locate_source(InterchannelParams params, const MicPair& mic,
                           const LocateOptions& options) {
  if (!std::isfinite(params.delta_t_s) || !std::isfinite(params.delta_e_db)) {
    throw Error("locate_source: cues must be finite");
  }
  if (!(options.r_min_m > 0.0) || !(options.r_max_m >= options.r_min_m) ||
      options.distance_steps < 1 || options.azimuth_steps < 1 || !(options.delay_scale_s > 0.0) ||
      !(options.level_scale_db > 0.0)) {
    throw Error("locate_source: empty search domain");
  }

  struct Cell {
    double residual;
    double r;
    double az;
  };
  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(options.distance_steps) *
                static_cast<std::size_t>(options.azimuth_steps));
  const double log_span = std::log(options.r_max_m / options.r_min_m);
  for (int i = 0; i < options.distance_steps; ++i) {
    const double frac = options.distance_steps == 1 ? 0.0 : double(i) / (options.distance_steps - 1);
    const double r = options.r_min_m * std::exp(frac * log_span);
    for (int j = 0; j < options.azimuth_steps; ++j) {
      const double az = -90.0 + (j + 0.5) * 180.0 / options.azimuth_steps;
      if (const auto e = cue_error(r, az, params, mic, options)) {
        cells.push_back({squared_norm(*e), r, az});
      }
    }
  }
  if (cells.empty()) throw Error("locate_source: forward model is singular over the search domain");

  const std::size_t seeds = std::min<std::size_t>(6, cells.size());
  std::partial_sort(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(seeds), cells.end(),
                    [](const Cell& a, const Cell& b) {
                      if (a.residual != b.residual) return a.residual < b.residual;
                      if (a.r != b.r) return a.r < b.r;
                      return a.az < b.az;
                    });

  std::optional<Refined> best;
  for (std::size_t s = 0; s < seeds; ++s) {
    const Refined candidate = refine(cells[s].r, cells[s].az, params, mic, options);
    if (!best || candidate.residual < best->residual) best = candidate;
  }

  LocateResult out;
  out.position = {best->r, best->az};
  out.residual = best->residual;
  out.distance_weakly_determined = best->distance_sensitivity < 1e-3;
  return out;
}

}  // namespace stereocarto
