#pragma once

// RIFF/WAVE reading and writing: PCM 16/24-bit and IEEE float 32-bit,
// one or two channels. Samples are doubles nominally in [-1, 1].

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "stereocarto/geometry.hpp"
#include "stereocarto/renderer.hpp"

namespace stereocarto {

enum class SampleFormat { pcm16, pcm24, float32 };

struct WavData {
  std::vector<std::vector<double>> channels;
  double sample_rate = 0.0;
  SampleFormat format = SampleFormat::float32;

  std::size_t frames() const { return channels.empty() ? 0 : channels.front().size(); }
};

struct WriteReport {
  std::size_t clipped_samples = 0;  // PCM samples clamped to full scale
};

/// Throws FormatError naming the offending header field (audio format, bits
/// per sample, channel count) and Error when the file cannot be read.
WavData read_wav(const std::filesystem::path& path);

/// Integer formats round to nearest and clamp out-of-range samples (no
/// dither, so output is deterministic). Throws Error on an empty buffer,
/// mismatched channel lengths or an unwritable path.
WriteReport write_wav(const std::filesystem::path& path, std::span<const std::vector<double>> channels,
                      double sample_rate, SampleFormat format);
WriteReport write_wav(const std::filesystem::path& path, const StereoBuffer& buffer, SampleFormat format);
WriteReport write_wav(const std::filesystem::path& path, const MonoClip& clip, SampleFormat format);

/// Requires exactly two channels.
StereoBuffer to_stereo(WavData data);
/// Requires exactly one channel.
MonoClip to_mono(WavData data);

int bits_per_sample(SampleFormat format);

}  // namespace stereocarto
