#include "stereocarto/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "stereocarto/error.hpp"
#include "stereocarto/parallel.hpp"

namespace stereocarto {
namespace {

constexpr double kPi = std::numbers::pi;

// Taps h[k + H - 1] for k in [-H+1, H], evaluating x at (i0 + frac) as
// sum_k x[i0 + k] h[k]. Normalized to unit DC gain; frac in (0, 1).
void fractional_kernel(double frac, int half_width, std::span<double> taps) {
  const double s = std::sin(kPi * frac);
  const double h = static_cast<double>(half_width);
  double sum = 0.0;
  for (int k = -half_width + 1; k <= half_width; ++k) {
    const double u = k - frac;
    const double sign = (k % 2 == 0) ? -1.0 : 1.0;
    const double sinc = sign * s / (kPi * u);
    const double window = 0.42 + 0.5 * std::cos(kPi * u / h) + 0.08 * std::cos(2.0 * kPi * u / h);
    const double v = sinc * window;
    taps[static_cast<std::size_t>(k + half_width - 1)] = v;
    sum += v;
  }
  for (double& v : taps) v /= sum;
}

double sample_at(std::span<const double> x, std::ptrdiff_t index) {
  if (index < 0 || index >= static_cast<std::ptrdiff_t>(x.size())) return 0.0;
  return x[static_cast<std::size_t>(index)];
}

// Splits a delay in samples into an integer part and a fractional part,
// snapping values within 1e-9 of an integer.
void split_delay(double delay_samples, std::ptrdiff_t& whole, double& frac) {
  const double nearest = std::round(delay_samples);
  if (std::abs(delay_samples - nearest) < 1e-9) {
    whole = static_cast<std::ptrdiff_t>(nearest);
    frac = 0.0;
    return;
  }
  const double fl = std::floor(delay_samples);
  whole = static_cast<std::ptrdiff_t>(fl);
  frac = delay_samples - fl;
}

std::size_t frames_for(double duration_s, double rate) {
  return static_cast<std::size_t>(std::ceil(duration_s * rate - 1e-9));
}

void check_config(const RenderConfig& config) {
  if (!(config.sample_rate > 0.0)) throw ConfigError("render: sample rate must be > 0");
  if (!(config.control_rate > 0.0) || config.control_rate > config.sample_rate) {
    throw ConfigError("render: control rate must lie in (0, sample rate]");
  }
  if (config.interpolator_half_width < 1) throw ConfigError("render: interpolator half width must be >= 1");
}

struct ChannelState {
  double delay_samples;
  double amplitude;
};

struct TickState {
  ChannelState left;
  ChannelState right;
};

void render_moving(const PointSource& source, const MicPair& mic, const RenderConfig& config,
                   StereoBuffer& out) {
  const double rate = config.sample_rate;
  const std::size_t frames = out.frames();
  const double duration = static_cast<double>(frames) / rate;
  const std::size_t ticks = static_cast<std::size_t>(std::ceil(duration * config.control_rate)) + 2;

  std::vector<TickState> states(ticks);
  for (std::size_t j = 0; j < ticks; ++j) {
    const double t = static_cast<double>(j) / config.control_rate;
    const CapsulePair caps = capsule_responses(trajectory_state_at(source.trajectory, t), mic);
    states[j].left = {caps.left.path_m / mic.sound_speed_mps * rate, caps.left.amplitude * source.gain};
    states[j].right = {caps.right.path_m / mic.sound_speed_mps * rate, caps.right.amplitude * source.gain};
  }

  const int half = config.interpolator_half_width;
  std::vector<double> taps(static_cast<std::size_t>(2 * half));
  std::span<const double> clip(source.clip.samples);

  auto render_channel = [&](auto member, std::vector<double>& dest) {
    for (std::size_t n = 0; n < frames; ++n) {
      const double tick_pos = static_cast<double>(n) / rate * config.control_rate;
      const std::size_t j = std::min(static_cast<std::size_t>(tick_pos), ticks - 2);
      const double u = tick_pos - static_cast<double>(j);
      const ChannelState& a = states[j].*member;
      const ChannelState& b = states[j + 1].*member;
      const double delay = a.delay_samples + u * (b.delay_samples - a.delay_samples);
      const double amp = a.amplitude + u * (b.amplitude - a.amplitude);

      std::ptrdiff_t whole = 0;
      double frac = 0.0;
      split_delay(static_cast<double>(n) - delay, whole, frac);
      double value = 0.0;
      if (frac == 0.0) {
        value = sample_at(clip, whole);
      } else {
        fractional_kernel(frac, half, taps);
        for (int k = -half + 1; k <= half; ++k) {
          value += sample_at(clip, whole + k) * taps[static_cast<std::size_t>(k + half - 1)];
        }
      }
      dest[n] = amp * value;
    }
  };
  render_channel(&TickState::left, out.left);
  render_channel(&TickState::right, out.right);
}

}  // namespace

std::vector<double> apply_fractional_delay(std::span<const double> signal, double delay_s,
                                           const RenderConfig& config) {
  if (!(delay_s >= 0.0) || !std::isfinite(delay_s)) throw Error("fractional delay must be finite and >= 0");
  check_config(config);
  const int half = config.interpolator_half_width;

  std::ptrdiff_t whole = 0;
  double frac = 0.0;
  split_delay(delay_s * config.sample_rate, whole, frac);
  const std::size_t ceil_delay = static_cast<std::size_t>(whole) + (frac > 0.0 ? 1 : 0);
  std::vector<double> out(signal.size() + ceil_delay + static_cast<std::size_t>(half), 0.0);

  if (frac == 0.0) {
    std::copy(signal.begin(), signal.end(), out.begin() + whole);
    return out;
  }

  // Sample position n - delay = (n - whole - 1) + (1 - frac).
  std::vector<double> taps(static_cast<std::size_t>(2 * half));
  fractional_kernel(1.0 - frac, half, taps);
  for (std::size_t n = 0; n < out.size(); ++n) {
    const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(n) - whole - 1;
    double acc = 0.0;
    for (int k = -half + 1; k <= half; ++k) {
      acc += sample_at(signal, base + k) * taps[static_cast<std::size_t>(k + half - 1)];
    }
    out[n] = acc;
  }
  return out;
}

StereoBuffer render_source(const PointSource& source, const MicPair& mic, const RenderConfig& config,
                           double duration_s) {
  check_config(config);
  if (!(duration_s > 0.0)) throw Error("render_source: duration must be > 0");
  if (source.clip.samples.empty()) throw Error("render_source: clip is empty");

  StereoBuffer out(frames_for(duration_s, config.sample_rate), config.sample_rate);

  if (const auto* fixed = std::get_if<FixedPosition>(&source.trajectory)) {
    const CapsulePair caps = capsule_responses(fixed->position, mic);
    auto place = [&](const CapsuleResponse& cap, std::vector<double>& dest) {
      const auto delayed = apply_fractional_delay(source.clip.samples, cap.path_m / mic.sound_speed_mps, config);
      const double amp = cap.amplitude * source.gain;
      const std::size_t n = std::min(dest.size(), delayed.size());
      for (std::size_t i = 0; i < n; ++i) dest[i] = amp * delayed[i];
    };
    place(caps.left, out.left);
    place(caps.right, out.right);
    return out;
  }

  render_moving(source, mic, config, out);
  return out;
}

double normalize_peak(StereoBuffer& buffer, double peak_dbfs) {
  double peak = 0.0;
  for (double v : buffer.left) peak = std::max(peak, std::abs(v));
  for (double v : buffer.right) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return 1.0;
  const double factor = std::pow(10.0, peak_dbfs / 20.0) / peak;
  for (double& v : buffer.left) v *= factor;
  for (double& v : buffer.right) v *= factor;
  return factor;
}

StereoBuffer mix_scene(const Scene& scene, const RenderConfig& config) {
  if (scene.sources.empty()) throw ConfigError("mix_scene: scene has no sources");
  const auto violations = validate_scene(scene);
  if (has_errors(violations)) {
    std::string message = "mix_scene: invalid scene";
    for (const auto& v : violations) {
      if (v.severity == Violation::Severity::error) message += "\n  " + v.field + ": " + v.message;
    }
    throw ConfigError(message);
  }
  if (config.sample_rate != scene.sample_rate) {
    throw ConfigError("mix_scene: render sample rate differs from scene sample rate");
  }

  std::vector<StereoBuffer> renders(scene.sources.size());
  parallel_for(scene.sources.size(), [&](std::size_t i) {
    renders[i] = render_source(scene.sources[i], scene.mic, config, scene.duration_s);
  });

  std::size_t frames = 0;
  for (const auto& r : renders) frames = std::max(frames, r.frames());
  StereoBuffer mix(frames, scene.sample_rate);
  for (const auto& r : renders) {
    for (std::size_t i = 0; i < r.frames(); ++i) {
      mix.left[i] += r.left[i];
      mix.right[i] += r.right[i];
    }
  }
  if (config.normalize) normalize_peak(mix);
  return mix;
}

}  // namespace stereocarto
