#pragma once

// Linear-phase FIR subband analysis without downsampling. Every band is a
// difference of two windowed-sinc lowpasses sharing one length, so the
// bands telescope to a pure delay and resynthesis is a plain sum.

#include <cstddef>
#include <span>
#include <vector>

#include "stereocarto/renderer.hpp"

namespace stereocarto {

struct BandSpec {
  int index = 0;  // 1-based
  double low_hz = 0.0;
  double high_hz = 0.0;
};

inline constexpr std::size_t kDefaultTaps = 8191;

/// The 10-band extended Leipp mapping; band 10 ends at Nyquist.
/// Throws ConfigError when Nyquist does not exceed 15 kHz.
std::vector<BandSpec> leipp_bands(double sample_rate);

/// Blackman-windowed sinc lowpass, n_taps odd, taps summing to 1.
/// Throws ConfigError on an even tap count or a cutoff outside (0, Nyquist).
std::vector<double> design_lowpass(double cutoff_hz, std::size_t n_taps, double sample_rate);

struct FilterBank {
  std::vector<BandSpec> bands;
  std::vector<std::vector<double>> taps;  // one symmetric vector per band
  double sample_rate = 44100.0;

  std::size_t n_taps() const { return taps.empty() ? 0 : taps.front().size(); }
  std::size_t group_delay() const { return (n_taps() - 1) / 2; }
};

/// band_k = lowpass(high_k) - lowpass(low_k), with lowpass(0) = 0 and
/// lowpass(Nyquist) = centered unit impulse. Throws ConfigError on a mapping
/// that is not contiguous over [0, Nyquist].
FilterBank build_bank(std::span<const BandSpec> mapping, std::size_t n_taps, double sample_rate);

struct SubbandStereo {
  std::vector<BandSpec> specs;
  std::vector<StereoBuffer> bands;
  std::size_t group_delay = 0;
  // true: bands are trimmed to the input timeline and length.
  // false: full convolution output, delayed by group_delay.
  bool delay_compensated = true;

  const StereoBuffer& band(int index) const;  // 1-based
};

struct AnalyzeOptions {
  bool compensate_delay = true;
};

/// Filters both channels through every band with overlap-add FFT
/// convolution. Throws ConfigError on a sample-rate mismatch.
SubbandStereo analyze(const StereoBuffer& input, const FilterBank& bank, AnalyzeOptions options = {});

/// Sum of the selected 1-based bands. Throws ConfigError on an empty
/// selection or an unknown band index.
StereoBuffer resynthesize(const SubbandStereo& subbands, std::span<const int> selection);

/// Full linear convolution (length x + h - 1) via overlap-add FFT.
std::vector<double> fast_convolve(std::span<const double> x, std::span<const double> h);

}  // namespace stereocarto
