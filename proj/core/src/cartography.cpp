#include "stereocarto/cartography.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <string>

#include "fft.hpp"
#include "stereocarto/error.hpp"
#include "stereocarto/parallel.hpp"

namespace stereocarto {
namespace {

std::vector<double> prefix_energy(std::span<const double> x) {
  std::vector<double> out(x.size() + 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) out[i + 1] = out[i] + x[i] * x[i];
  return out;
}

double to_dbfs(double energy, std::size_t count) {
  if (count == 0 || !(energy > 0.0)) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(energy / static_cast<double>(count));
}

// Raw cross-correlation c[k] = sum_n left[n] * right[n + k] for k in [-M, M],
// returned at index k + M.
std::vector<double> cross_correlation(std::span<const double> left, std::span<const double> right,
                                      std::size_t max_lag) {
  const std::size_t n = left.size();
  const detail::RealFft fft(detail::next_power_of_two(std::max<std::size_t>(n + max_lag, 2)));
  std::vector<double> padded(fft.size(), 0.0);
  std::vector<std::complex<double>> spec_l(fft.spectrum_size());
  std::vector<std::complex<double>> spec_r(fft.spectrum_size());
  std::copy(left.begin(), left.end(), padded.begin());
  fft.forward(padded, spec_l);
  std::fill(padded.begin(), padded.end(), 0.0);
  std::copy(right.begin(), right.end(), padded.begin());
  fft.forward(padded, spec_r);
  for (std::size_t k = 0; k < spec_l.size(); ++k) spec_l[k] = std::conj(spec_l[k]) * spec_r[k];
  fft.inverse(spec_l, padded);

  std::vector<double> out(2 * max_lag + 1);
  for (std::size_t i = 0; i <= 2 * max_lag; ++i) {
    const std::ptrdiff_t lag = static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(max_lag);
    const std::size_t idx = lag >= 0 ? static_cast<std::size_t>(lag) : fft.size() - static_cast<std::size_t>(-lag);
    out[i] = padded[idx];
  }
  return out;
}

void check_histogram_config(const HistogramConfig& c) {
  if (!(c.delay_bin_s > 0.0) || !(c.de_bin_db > 0.0)) throw ConfigError("histogram bin widths must be > 0");
  if (!(c.delay_range_s >= 0.0) || !(c.de_range_db >= 0.0)) throw ConfigError("histogram ranges must be >= 0");
}

double cue_value(const FrameEstimate& f, CueAxis axis) {
  return axis == CueAxis::delay ? f.delta_t_s : f.delta_e_db;
}

struct BandPeak {
  double delta_t_s;
  double delta_e_db;
  std::uint64_t support;
  int band;
};

}  // namespace

FrameEstimate estimate_frame(std::span<const double> left, std::span<const double> right, double sample_rate,
                             const FrameConfig& config) {
  if (left.size() != right.size()) throw Error("estimate_frame: channel windows differ in length");
  if (!(sample_rate > 0.0)) throw Error("estimate_frame: sample rate must be > 0");
  if (!(config.max_lag_s >= 0.0)) throw Error("estimate_frame: max lag must be >= 0");
  const std::size_t window = left.size();
  const std::size_t max_lag = static_cast<std::size_t>(std::floor(config.max_lag_s * sample_rate + 1e-9));
  if (window == 0 || window < 2 * max_lag) {
    throw Error("estimate_frame: window of " + std::to_string(window) + " samples is shorter than 2 * max lag (" +
                std::to_string(2 * max_lag) + ")");
  }

  FrameEstimate out;
  const auto energy_l = prefix_energy(left);
  const auto energy_r = prefix_energy(right);
  const bool loud_enough = to_dbfs(energy_l.back(), window) >= config.min_rms_dbfs &&
                           to_dbfs(energy_r.back(), window) >= config.min_rms_dbfs;
  if (!(energy_l.back() > 0.0) || !(energy_r.back() > 0.0)) return out;

  const auto raw = cross_correlation(left, right, max_lag);
  const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(max_lag);
  const std::ptrdiff_t w = static_cast<std::ptrdiff_t>(window);

  // Overlap energies at lag k: left[lo, hi) against right[lo + k, hi + k).
  auto overlap = [&](std::ptrdiff_t k, double& el, double& er) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -k);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(w, w - k);
    el = energy_l[static_cast<std::size_t>(hi)] - energy_l[static_cast<std::size_t>(lo)];
    er = energy_r[static_cast<std::size_t>(hi + k)] - energy_r[static_cast<std::size_t>(lo + k)];
  };

  std::vector<double> rho(raw.size(), 0.0);
  for (std::ptrdiff_t k = -m; k <= m; ++k) {
    double el = 0.0, er = 0.0;
    overlap(k, el, er);
    const double denom = std::sqrt(el * er);
    rho[static_cast<std::size_t>(k + m)] = denom > 0.0 ? raw[static_cast<std::size_t>(k + m)] / denom : 0.0;
  }

  std::size_t best = static_cast<std::size_t>(m);
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (rho[i] > rho[best]) best = i;
  }
  const std::ptrdiff_t lag = static_cast<std::ptrdiff_t>(best) - m;

  double offset = 0.0;
  if (best > 0 && best + 1 < rho.size()) {
    const double y0 = rho[best - 1], y1 = rho[best], y2 = rho[best + 1];
    const double curvature = y0 - 2.0 * y1 + y2;
    if (curvature < 0.0) offset = std::clamp(0.5 * (y0 - y2) / curvature, -0.5, 0.5);
  }

  double el = 0.0, er = 0.0;
  overlap(lag, el, er);
  out.peak_correlation = std::clamp(rho[best], -1.0, 1.0);
  out.delta_t_s = (static_cast<double>(lag) + offset) / sample_rate;
  const bool level_defined = el > 0.0 && er > 0.0;
  out.delta_e_db = level_defined ? 10.0 * std::log10(el / er) : 0.0;
  out.valid = loud_enough && level_defined && out.peak_correlation >= config.min_correlation &&
              std::isfinite(out.delta_t_s) && std::isfinite(out.delta_e_db);
  return out;
}

TemporalLaw temporal_law(const StereoBuffer& signal, int band, const LawConfig& config) {
  if (!(config.window_s > 0.0) || !(config.hop_s > 0.0)) throw ConfigError("law window and hop must be > 0");
  const double rate = signal.sample_rate;
  const std::size_t window = static_cast<std::size_t>(std::llround(config.window_s * rate));
  const std::size_t hop = static_cast<std::size_t>(std::llround(config.hop_s * rate));
  if (window == 0 || hop == 0) throw ConfigError("law window and hop must span at least one sample");
  if (signal.left.size() != signal.right.size()) throw Error("temporal_law: channel lengths differ");
  if (signal.frames() < window) {
    throw Error("temporal_law: signal of " + std::to_string(signal.frames()) +
                " samples is shorter than one window of " + std::to_string(window));
  }

  TemporalLaw law;
  law.band = band;
  law.window_s = static_cast<double>(window) / rate;
  law.hop_s = static_cast<double>(hop) / rate;
  const std::size_t count = (signal.frames() - window) / hop + 1;
  law.frames.resize(count);
  const std::span<const double> left(signal.left), right(signal.right);
  parallel_for(count, [&](std::size_t i) {
    const std::size_t start = i * hop;
    FrameEstimate f = estimate_frame(left.subspan(start, window), right.subspan(start, window), rate, config.frame);
    f.frame_index = i;
    f.time_s = (static_cast<double>(start) + 0.5 * static_cast<double>(window)) / rate;
    law.frames[i] = f;
  });
  return law;
}

std::vector<TemporalLaw> temporal_laws(const SubbandStereo& subbands, const LawConfig& config) {
  std::vector<TemporalLaw> laws;
  laws.reserve(subbands.bands.size());
  for (std::size_t k = 0; k < subbands.bands.size(); ++k) {
    const int index = k < subbands.specs.size() ? subbands.specs[k].index : static_cast<int>(k + 1);
    laws.push_back(temporal_law(subbands.bands[k], index, config));
  }
  return laws;
}

TemporalLaw smooth_law(const TemporalLaw& law, const SmoothConfig& config) {
  TemporalLaw out = law;
  if (!(config.cutoff_hz > 0.0) || !(law.hop_s > 0.0)) return out;
  const double frame_rate = 1.0 / law.hop_s;
  std::size_t length = static_cast<std::size_t>(std::max(1.0, std::round(frame_rate / config.cutoff_hz)));
  if (length % 2 == 0) ++length;
  const std::size_t half = length / 2;

  const auto& frames = law.frames;
  std::size_t i = 0;
  while (i < frames.size()) {
    if (!frames[i].valid) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < frames.size() && frames[end].valid) ++end;
    // Run [i, end).
    for (std::size_t j = i; j < end; ++j) {
      const std::size_t h = std::min({half, j - i, end - 1 - j});
      double dt = 0.0, de = 0.0;
      for (std::size_t q = j - h; q <= j + h; ++q) {
        dt += frames[q].delta_t_s;
        de += frames[q].delta_e_db;
      }
      const double n = static_cast<double>(2 * h + 1);
      out.frames[j].delta_t_s = dt / n;
      out.frames[j].delta_e_db = de / n;
    }
    i = end;
  }
  return out;
}

BinAxis BinAxis::make(double width, double range) {
  if (!(width > 0.0) || !(range >= 0.0) || !std::isfinite(width) || !std::isfinite(range)) {
    throw ConfigError("histogram bins need a positive width and a non-negative range");
  }
  return {width, static_cast<int>(std::llround(range / width))};
}

std::optional<std::size_t> BinAxis::bin_of(double value) const {
  if (!std::isfinite(value)) return std::nullopt;
  const double k = std::round(value / width);
  if (std::abs(k) > static_cast<double>(half_bins)) return std::nullopt;
  return static_cast<std::size_t>(static_cast<long long>(k) + half_bins);
}

std::uint64_t Histogram::total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }

Histogram JointHistogram::marginal(CueAxis axis) const {
  Histogram out;
  out.axis = axis;
  out.bins = axis == CueAxis::delay ? delay : attenuation;
  out.band = band;
  out.overflow = overflow;
  out.counts.assign(out.bins.size(), 0);
  for (std::size_t i = 0; i < delay.size(); ++i) {
    for (std::size_t j = 0; j < attenuation.size(); ++j) {
      out.counts[axis == CueAxis::delay ? i : j] += at(i, j);
    }
  }
  return out;
}

BinAxis axis_bins(CueAxis axis, const HistogramConfig& config) {
  check_histogram_config(config);
  return axis == CueAxis::delay ? BinAxis::make(config.delay_bin_s, config.delay_range_s)
                                : BinAxis::make(config.de_bin_db, config.de_range_db);
}

Histogram histogram_1d(const TemporalLaw& law, CueAxis axis, const HistogramConfig& config) {
  Histogram out = histogram_1d(std::span<const TemporalLaw>(&law, 1), axis, config);
  out.band = law.band;
  return out;
}

Histogram histogram_1d(std::span<const TemporalLaw> laws, CueAxis axis, const HistogramConfig& config) {
  Histogram out;
  out.axis = axis;
  out.bins = axis_bins(axis, config);
  out.counts.assign(out.bins.size(), 0);
  for (const TemporalLaw& law : laws) {
    for (const FrameEstimate& f : law.frames) {
      if (!f.valid) continue;
      if (auto bin = out.bins.bin_of(cue_value(f, axis))) {
        ++out.counts[*bin];
      } else {
        ++out.overflow;
      }
    }
  }
  return out;
}

Histogram global_histogram(std::span<const Histogram> per_band) {
  if (per_band.empty()) throw ConfigError("global_histogram: no band histograms");
  Histogram out;
  out.axis = per_band.front().axis;
  out.bins = per_band.front().bins;
  out.counts.assign(out.bins.size(), 0);
  for (const Histogram& h : per_band) {
    if (h.axis != out.axis || !(h.bins == out.bins) || h.counts.size() != out.counts.size()) {
      throw ConfigError("global_histogram: band histograms use different binning");
    }
    for (std::size_t i = 0; i < out.counts.size(); ++i) out.counts[i] += h.counts[i];
    out.overflow += h.overflow;
  }
  return out;
}

JointHistogram joint_histogram(const TemporalLaw& law, const HistogramConfig& config) {
  JointHistogram out;
  out.delay = axis_bins(CueAxis::delay, config);
  out.attenuation = axis_bins(CueAxis::attenuation, config);
  out.band = law.band;
  out.counts.assign(out.delay.size() * out.attenuation.size(), 0);
  for (const FrameEstimate& f : law.frames) {
    if (!f.valid) continue;
    const auto i = out.delay.bin_of(f.delta_t_s);
    const auto j = out.attenuation.bin_of(f.delta_e_db);
    if (i && j) {
      ++out.counts[*i * out.attenuation.size() + *j];
    } else {
      ++out.overflow;
    }
  }
  return out;
}

std::vector<Peak> detect_peaks(const Histogram& histogram, const PeakConfig& config) {
  const auto& c = histogram.counts;
  std::vector<Peak> out;
  if (c.empty()) return out;
  const std::uint64_t max_count = *std::max_element(c.begin(), c.end());
  if (max_count == 0) return out;
  const double threshold = config.min_rel_height * static_cast<double>(max_count);

  std::vector<Peak> local;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const std::uint64_t left = i > 0 ? c[i - 1] : 0;
    const std::uint64_t right = i + 1 < c.size() ? c[i + 1] : 0;
    if (c[i] > 0 && static_cast<double>(c[i]) >= threshold && c[i] >= left && c[i] >= right) {
      local.push_back({i, histogram.bins.center(i), c[i]});
    }
  }
  std::stable_sort(local.begin(), local.end(), [](const Peak& a, const Peak& b) { return a.count > b.count; });
  const std::size_t separation = static_cast<std::size_t>(std::max(config.min_separation_bins, 0));
  for (const Peak& p : local) {
    const bool isolated = std::all_of(out.begin(), out.end(), [&](const Peak& q) {
      return (p.bin > q.bin ? p.bin - q.bin : q.bin - p.bin) >= separation;
    });
    if (isolated) out.push_back(p);
  }
  return out;
}

std::vector<JointPeak> detect_peaks(const JointHistogram& histogram, const PeakConfig& config) {
  std::vector<JointPeak> out;
  const std::size_t rows = histogram.delay.size();
  const std::size_t cols = histogram.attenuation.size();
  if (histogram.counts.empty()) return out;
  const std::uint64_t max_count = *std::max_element(histogram.counts.begin(), histogram.counts.end());
  if (max_count == 0) return out;
  const double threshold = config.min_rel_height * static_cast<double>(max_count);

  std::vector<JointPeak> local;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const std::uint64_t v = histogram.at(i, j);
      if (v == 0 || static_cast<double>(v) < threshold) continue;
      bool is_max = true;
      for (std::size_t a = (i > 0 ? i - 1 : 0); a <= std::min(rows - 1, i + 1) && is_max; ++a) {
        for (std::size_t b = (j > 0 ? j - 1 : 0); b <= std::min(cols - 1, j + 1); ++b) {
          if (histogram.at(a, b) > v) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) local.push_back({i, j, histogram.delay.center(i), histogram.attenuation.center(j), v});
    }
  }
  std::stable_sort(local.begin(), local.end(),
                   [](const JointPeak& a, const JointPeak& b) { return a.count > b.count; });
  const std::size_t separation = static_cast<std::size_t>(std::max(config.min_separation_bins, 0));
  auto distance = [](std::size_t a, std::size_t b) { return a > b ? a - b : b - a; };
  for (const JointPeak& p : local) {
    const bool isolated = std::all_of(out.begin(), out.end(), [&](const JointPeak& q) {
      return std::max(distance(p.delay_bin, q.delay_bin), distance(p.de_bin, q.de_bin)) >= separation;
    });
    if (isolated) out.push_back(p);
  }
  return out;
}

std::vector<SourceCandidate> extract_candidates(std::span<const TemporalLaw> laws, const MicPair& mic,
                                                const CandidateConfig& config) {
  check_histogram_config(config.histogram);

  std::vector<std::vector<BandPeak>> per_band(laws.size());
  parallel_for(laws.size(), [&](std::size_t index) {
    const JointHistogram joint = joint_histogram(laws[index], config.histogram);
    const std::size_t rows = joint.delay.size();
    const std::size_t cols = joint.attenuation.size();
    for (const JointPeak& p : detect_peaks(joint, config.peaks)) {
      double weight = 0.0, dt = 0.0, de = 0.0;
      for (std::size_t a = (p.delay_bin > 0 ? p.delay_bin - 1 : 0); a <= std::min(rows - 1, p.delay_bin + 1); ++a) {
        for (std::size_t b = (p.de_bin > 0 ? p.de_bin - 1 : 0); b <= std::min(cols - 1, p.de_bin + 1); ++b) {
          const double c = static_cast<double>(joint.at(a, b));
          weight += c;
          dt += c * joint.delay.center(a);
          de += c * joint.attenuation.center(b);
        }
      }
      const auto support = static_cast<std::uint64_t>(weight);
      if (support < std::max<std::uint64_t>(config.min_support, 1)) continue;
      per_band[index].push_back({dt / weight, de / weight, support, laws[index].band});
    }
  });

  std::vector<BandPeak> peaks;
  for (const auto& band_peaks : per_band) peaks.insert(peaks.end(), band_peaks.begin(), band_peaks.end());
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const BandPeak& a, const BandPeak& b) { return a.support > b.support; });

  const double dt_tol = config.histogram.delay_bin_s * (1.0 + 1e-9);
  const double de_tol = config.histogram.de_bin_db * (1.0 + 1e-9);
  std::vector<SourceCandidate> candidates;
  for (const BandPeak& p : peaks) {
    auto match = std::find_if(candidates.begin(), candidates.end(), [&](const SourceCandidate& c) {
      return std::abs(c.delta_t_s - p.delta_t_s) <= dt_tol && std::abs(c.delta_e_db - p.delta_e_db) <= de_tol;
    });
    if (match == candidates.end()) {
      candidates.push_back({p.delta_t_s, p.delta_e_db, p.support, {p.band}, std::nullopt});
      continue;
    }
    const double total = static_cast<double>(match->support + p.support);
    match->delta_t_s = (match->delta_t_s * static_cast<double>(match->support) +
                        p.delta_t_s * static_cast<double>(p.support)) / total;
    match->delta_e_db = (match->delta_e_db * static_cast<double>(match->support) +
                         p.delta_e_db * static_cast<double>(p.support)) / total;
    match->support += p.support;
    match->bands.insert(p.band);
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const SourceCandidate& a, const SourceCandidate& b) { return a.support > b.support; });

  if (config.locate) {
    for (SourceCandidate& c : candidates) {
      try {
        c.location = locate_source({c.delta_t_s, c.delta_e_db}, mic, config.locate_options);
      } catch (const Error&) {
        c.location = std::nullopt;
      }
    }
  }
  return candidates;
}

}  // namespace stereocarto
