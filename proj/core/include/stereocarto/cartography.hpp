#pragma once

// Windowed interchannel delay/level estimation per subband, temporal laws,
// cue histograms and source candidate extraction.
//
// Sign conventions follow InterchannelParams: positive delta_t means the
// left channel leads, positive delta_e means the left channel is louder.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "stereocarto/filterbank.hpp"
#include "stereocarto/geometry.hpp"

namespace stereocarto {

struct FrameConfig {
  double max_lag_s = 1.0e-3;
  double min_rms_dbfs = -60.0;
  double min_correlation = 0.5;
};

struct FrameEstimate {
  std::size_t frame_index = 0;
  double time_s = 0.0;  // window center
  double delta_t_s = 0.0;
  double delta_e_db = 0.0;
  double peak_correlation = 0.0;
  bool valid = false;
};

/// Normalized cross-correlation over lags in [-max_lag, +max_lag], argmax
/// refined by a 3-point parabola. delta_e is 20 log10 of the RMS ratio on the
/// overlap aligned at the integer peak lag. Frames fail validation when either
/// channel RMS is below min_rms_dbfs or the peak is below min_correlation.
/// Throws Error when the window is shorter than 2 * max_lag samples or the
/// channel windows differ in length.
FrameEstimate estimate_frame(std::span<const double> left, std::span<const double> right,
                             double sample_rate, const FrameConfig& config = {});

struct LawConfig {
  double window_s = 0.050;
  double hop_s = 0.050;
  FrameConfig frame;
};

struct TemporalLaw {
  int band = 0;  // 1-based, 0 for a full-band law
  double window_s = 0.0;
  double hop_s = 0.0;
  std::vector<FrameEstimate> frames;
};

/// Tiles one stereo signal into windows (trailing partial window dropped).
/// Throws Error when the signal is shorter than one window.
TemporalLaw temporal_law(const StereoBuffer& signal, int band, const LawConfig& config = {});

/// One law per band of `subbands`.
std::vector<TemporalLaw> temporal_laws(const SubbandStereo& subbands, const LawConfig& config = {});

struct SmoothConfig {
  double cutoff_hz = 2.0;
};

/// Centered moving average over runs of valid frames. The averaging length
/// is frame_rate / cutoff rounded to an odd count and shrinks symmetrically
/// at run edges. Invalid frames stay invalid and untouched.
TemporalLaw smooth_law(const TemporalLaw& law, const SmoothConfig& config = {});

enum class CueAxis { delay, attenuation };

struct HistogramConfig {
  double delay_bin_s = 10e-6;
  double delay_range_s = 1.5e-3;  // bin centers span [-range, +range]
  double de_bin_db = 0.25;
  double de_range_db = 24.0;
};

/// Uniform bins centered on integer multiples of the bin width.
struct BinAxis {
  double width = 0.0;
  int half_bins = 0;  // centers at k * width for k in [-half_bins, half_bins]

  static BinAxis make(double width, double range);
  std::size_t size() const { return static_cast<std::size_t>(2 * half_bins + 1); }
  double center(std::size_t bin) const { return (static_cast<double>(bin) - half_bins) * width; }
  std::optional<std::size_t> bin_of(double value) const;
  bool operator==(const BinAxis&) const = default;
};

struct Histogram {
  CueAxis axis = CueAxis::delay;
  BinAxis bins;
  std::vector<std::uint64_t> counts;
  std::optional<int> band;     // nullopt: global
  std::uint64_t overflow = 0;  // valid frames outside the bin range

  std::uint64_t total() const;
};

struct JointHistogram {
  BinAxis delay;
  BinAxis attenuation;
  std::vector<std::uint64_t> counts;  // row-major [delay bin][attenuation bin]
  std::optional<int> band;
  std::uint64_t overflow = 0;  // valid frames outside either range

  std::uint64_t at(std::size_t delay_bin, std::size_t de_bin) const {
    return counts[delay_bin * attenuation.size() + de_bin];
  }
  Histogram marginal(CueAxis axis) const;
};

BinAxis axis_bins(CueAxis axis, const HistogramConfig& config);

/// Counts valid frames. Out-of-range values go to `overflow`, so
/// total() + overflow equals the number of valid frames.
/// Throws ConfigError on a non-positive bin width or range.
Histogram histogram_1d(const TemporalLaw& law, CueAxis axis, const HistogramConfig& config = {});

/// Histogram over several laws at once, labelled global.
Histogram histogram_1d(std::span<const TemporalLaw> laws, CueAxis axis, const HistogramConfig& config = {});

/// Bin-wise sum. Throws ConfigError when the histograms disagree on axis or
/// binning, or when the list is empty.
Histogram global_histogram(std::span<const Histogram> per_band);

JointHistogram joint_histogram(const TemporalLaw& law, const HistogramConfig& config = {});

struct PeakConfig {
  double min_rel_height = 0.1;  // fraction of the largest count
  int min_separation_bins = 3;
};

struct Peak {
  std::size_t bin = 0;
  double center = 0.0;
  std::uint64_t count = 0;
};

/// Local maxima at or above the threshold, at least min_separation bins
/// apart, tallest first (ties: lower bin first).
std::vector<Peak> detect_peaks(const Histogram& histogram, const PeakConfig& config = {});

struct JointPeak {
  std::size_t delay_bin = 0;
  std::size_t de_bin = 0;
  double delta_t_s = 0.0;
  double delta_e_db = 0.0;
  std::uint64_t count = 0;
};

/// 8-neighbourhood local maxima; separation is the Chebyshev bin distance.
std::vector<JointPeak> detect_peaks(const JointHistogram& histogram, const PeakConfig& config = {});

struct SourceCandidate {
  double delta_t_s = 0.0;
  double delta_e_db = 0.0;
  std::uint64_t support = 0;
  std::set<int> bands;
  std::optional<LocateResult> location;
};

struct CandidateConfig {
  HistogramConfig histogram;
  PeakConfig peaks;
  std::uint64_t min_support = 3;  // frames around a band peak
  bool locate = false;
  LocateOptions locate_options;
};

/// Detects peaks in each band's joint histogram, refines each to the
/// count-weighted centroid of its 3x3 neighbourhood (whose count is the
/// support), then merges peaks from different bands lying within one bin on
/// both axes. Ranked by support, descending.
std::vector<SourceCandidate> extract_candidates(std::span<const TemporalLaw> laws, const MicPair& mic,
                                                const CandidateConfig& config = {});

}  // namespace stereocarto
