#pragma once

// Free-field stereo rendering of point sources through a MicPair.

#include <cstddef>
#include <span>
#include <vector>

#include "stereocarto/geometry.hpp"

namespace stereocarto {

struct StereoBuffer {
  std::vector<double> left;
  std::vector<double> right;
  double sample_rate = 44100.0;

  StereoBuffer() = default;
  StereoBuffer(std::size_t frames, double rate) : left(frames, 0.0), right(frames, 0.0), sample_rate(rate) {}

  std::size_t frames() const { return left.size(); }
};

struct RenderConfig {
  double sample_rate = 44100.0;
  double control_rate = 1000.0;      // trajectory updates per second
  int interpolator_half_width = 16;  // windowed-sinc taps per side
  bool normalize = true;             // joint peak normalization to -1 dBFS
};

/// Delays `signal` by `delay_s` seconds. Integer-sample delays are exact
/// shifts; fractional parts use a Blackman-windowed sinc with unit DC gain.
/// Output length = input + ceil(delay * rate) + half width.
/// Throws Error on a negative delay.
std::vector<double> apply_fractional_delay(std::span<const double> signal, double delay_s,
                                           const RenderConfig& config);

/// Renders one source for `duration_s` seconds. Moving sources get their
/// per-capsule delay and gain recomputed at the control rate and linearly
/// interpolated per sample (Doppler follows from the moving delay line).
StereoBuffer render_source(const PointSource& source, const MicPair& mic, const RenderConfig& config,
                           double duration_s);

/// Sum of every source render. config.sample_rate must match the scene.
/// Throws ConfigError when validate_scene reports errors.
StereoBuffer mix_scene(const Scene& scene, const RenderConfig& config);

/// Scales both channels by one factor so the joint peak sits at `peak_dbfs`.
/// Returns the factor applied (1 for a silent buffer).
double normalize_peak(StereoBuffer& buffer, double peak_dbfs = -1.0);

}  // namespace stereocarto
