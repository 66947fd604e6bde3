#include "stereocarto/wav.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "stereocarto/error.hpp"

namespace stereocarto {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t read_u32(const unsigned char* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
}
std::uint16_t read_u16(const unsigned char* p) { return std::uint16_t(p[0] | (p[1] << 8)); }

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}
void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}
void put_tag(std::vector<unsigned char>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

int bits_per_sample(SampleFormat format) {
  switch (format) {
    case SampleFormat::pcm16:
      return 16;
    case SampleFormat::pcm24:
      return 24;
    case SampleFormat::float32:
      return 32;
  }
  return 32;
}

WavData read_wav(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  const std::string name = path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError(name + ": not a RIFF/WAVE file");
  }

  std::uint16_t audio_format = 0, channels = 0, bits = 0, block_align = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t available = std::min<std::size_t>(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (available < 16) throw FormatError(name + ": fmt chunk is truncated");
      const unsigned char* f = bytes.data() + body;
      audio_format = read_u16(f);
      channels = read_u16(f + 2);
      rate = read_u32(f + 4);
      block_align = read_u16(f + 12);
      bits = read_u16(f + 14);
      if (audio_format == kFormatExtensible) {
        if (available < 40) throw FormatError(name + ": WAVE_FORMAT_EXTENSIBLE fmt chunk is truncated");
        audio_format = read_u16(f + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = available;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) throw FormatError(name + ": missing fmt chunk");
  if (data == nullptr) throw FormatError(name + ": missing data chunk");

  WavData out;
  if (audio_format == kFormatPcm && bits == 16) {
    out.format = SampleFormat::pcm16;
  } else if (audio_format == kFormatPcm && bits == 24) {
    out.format = SampleFormat::pcm24;
  } else if (audio_format == kFormatFloat && bits == 32) {
    out.format = SampleFormat::float32;
  } else if (audio_format != kFormatPcm && audio_format != kFormatFloat) {
    throw FormatError(name + ": unsupported audio_format " + std::to_string(audio_format) +
                      " (expected PCM or IEEE float)");
  } else {
    throw FormatError(name + ": unsupported bits_per_sample " + std::to_string(bits) + " for audio_format " +
                      std::to_string(audio_format));
  }
  if (channels < 1 || channels > 2) {
    throw FormatError(name + ": unsupported num_channels " + std::to_string(channels) + " (expected 1 or 2)");
  }
  if (rate == 0) throw FormatError(name + ": sample_rate is 0");
  const std::size_t bytes_per_sample = static_cast<std::size_t>(bits / 8);
  if (block_align != channels * bytes_per_sample) {
    throw FormatError(name + ": block_align " + std::to_string(block_align) + " does not match channels * bytes");
  }

  const std::size_t frames = data_size / block_align;
  out.sample_rate = rate;
  out.channels.assign(channels, std::vector<double>(frames));
  for (std::size_t n = 0; n < frames; ++n) {
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* s = data + n * block_align + c * bytes_per_sample;
      double v = 0.0;
      switch (out.format) {
        case SampleFormat::pcm16:
          v = static_cast<std::int16_t>(read_u16(s)) / 32768.0;
          break;
        case SampleFormat::pcm24: {
          std::int32_t raw = std::int32_t(s[0]) | (std::int32_t(s[1]) << 8) | (std::int32_t(s[2]) << 16);
          if (raw & 0x800000) raw -= 0x1000000;
          v = raw / 8388608.0;
          break;
        }
        case SampleFormat::float32: {
          const std::uint32_t bitsv = read_u32(s);
          float f;
          std::memcpy(&f, &bitsv, sizeof f);
          v = f;
          break;
        }
      }
      out.channels[c][n] = v;
    }
  }
  return out;
}

WriteReport write_wav(const std::filesystem::path& path, std::span<const std::vector<double>> channels,
                      double sample_rate, SampleFormat format) {
  if (channels.empty() || channels.front().empty()) throw Error("write_wav: empty buffer for " + path.string());
  if (channels.size() > 2) throw Error("write_wav: at most two channels are supported");
  for (const auto& c : channels) {
    if (c.size() != channels.front().size()) throw Error("write_wav: channel lengths differ");
  }
  if (!(sample_rate > 0.0) || sample_rate != std::round(sample_rate)) {
    throw Error("write_wav: sample rate must be a positive integer");
  }

  const std::size_t frames = channels.front().size();
  const auto count = static_cast<std::uint16_t>(channels.size());
  const int bits = bits_per_sample(format);
  const std::size_t bytes_per_sample = static_cast<std::size_t>(bits / 8);
  const std::size_t data_size = frames * count * bytes_per_sample;
  if (data_size > 0xFFFFFFF0u) throw Error("write_wav: data exceeds the RIFF size limit");

  WriteReport report;
  std::vector<unsigned char> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put_u32(out, static_cast<std::uint32_t>(36 + data_size));
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, format == SampleFormat::float32 ? kFormatFloat : kFormatPcm);
  put_u16(out, count);
  put_u32(out, static_cast<std::uint32_t>(sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sample_rate * count * bytes_per_sample));
  put_u16(out, static_cast<std::uint16_t>(count * bytes_per_sample));
  put_u16(out, static_cast<std::uint16_t>(bits));
  put_tag(out, "data");
  put_u32(out, static_cast<std::uint32_t>(data_size));

  auto quantize = [&](double v, double scale, std::int32_t lo, std::int32_t hi) {
    if (v > 1.0 || v < -1.0 || !std::isfinite(v)) ++report.clipped_samples;
    const double q = std::isfinite(v) ? std::round(v * scale) : 0.0;
    return static_cast<std::int32_t>(std::clamp(q, double(lo), double(hi)));
  };

  for (std::size_t n = 0; n < frames; ++n) {
    for (const auto& c : channels) {
      const double v = c[n];
      switch (format) {
        case SampleFormat::pcm16:
          put_u16(out, static_cast<std::uint16_t>(quantize(v, 32768.0, -32768, 32767)));
          break;
        case SampleFormat::pcm24: {
          const auto q = static_cast<std::uint32_t>(quantize(v, 8388608.0, -8388608, 8388607));
          out.push_back(static_cast<unsigned char>(q & 0xFF));
          out.push_back(static_cast<unsigned char>((q >> 8) & 0xFF));
          out.push_back(static_cast<unsigned char>((q >> 16) & 0xFF));
          break;
        }
        case SampleFormat::float32: {
          const float f = static_cast<float>(v);
          std::uint32_t bitsv;
          std::memcpy(&bitsv, &f, sizeof bitsv);
          put_u32(out, bitsv);
          break;
        }
      }
    }
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("cannot write " + path.string());
  file.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!file) throw Error("write failed for " + path.string());
  return report;
}

WriteReport write_wav(const std::filesystem::path& path, const StereoBuffer& buffer, SampleFormat format) {
  const std::array<std::vector<double>, 2> channels{buffer.left, buffer.right};
  return write_wav(path, channels, buffer.sample_rate, format);
}

WriteReport write_wav(const std::filesystem::path& path, const MonoClip& clip, SampleFormat format) {
  const std::array<std::vector<double>, 1> channels{clip.samples};
  return write_wav(path, channels, clip.sample_rate, format);
}

StereoBuffer to_stereo(WavData data) {
  if (data.channels.size() != 2) {
    throw FormatError("expected a 2-channel file, got num_channels " + std::to_string(data.channels.size()));
  }
  StereoBuffer out;
  out.sample_rate = data.sample_rate;
  out.left = std::move(data.channels[0]);
  out.right = std::move(data.channels[1]);
  return out;
}

MonoClip to_mono(WavData data) {
  if (data.channels.size() != 1) {
    throw FormatError("expected a 1-channel clip, got num_channels " + std::to_string(data.channels.size()));
  }
  return {std::move(data.channels[0]), data.sample_rate};
}

}  // namespace stereocarto
