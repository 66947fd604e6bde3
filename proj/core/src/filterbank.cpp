#include "stereocarto/filterbank.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <set>
#include <string>

#include "fft.hpp"
#include "stereocarto/error.hpp"
#include "stereocarto/parallel.hpp"

namespace stereocarto {
namespace {

using Spectrum = std::vector<std::complex<double>>;

// Blocks transformed together before the per-filter pass; bounds memory on
// long inputs.
constexpr std::size_t kBlocksPerPass = 32;

class OverlapAdd {
 public:
  explicit OverlapAdd(std::size_t filter_length)
      : filter_length_(filter_length),
        fft_(detail::next_power_of_two(std::max<std::size_t>(4 * filter_length, 16))),
        block_(fft_.size() - filter_length + 1) {}

  std::size_t block() const { return block_; }
  std::size_t spectrum_size() const { return fft_.spectrum_size(); }

  Spectrum filter_spectrum(std::span<const double> taps) const {
    std::vector<double> padded(fft_.size(), 0.0);
    std::copy(taps.begin(), taps.end(), padded.begin());
    Spectrum spec(fft_.spectrum_size());
    fft_.forward(padded, spec);
    return spec;
  }

  std::size_t block_count(std::size_t length) const { return (length + block_ - 1) / block_; }

  Spectrum block_spectrum(std::span<const double> x, std::size_t block_index) const {
    std::vector<double> padded(fft_.size(), 0.0);
    const std::size_t begin = block_index * block_;
    const std::size_t end = std::min(x.size(), begin + block_);
    std::copy(x.begin() + static_cast<std::ptrdiff_t>(begin), x.begin() + static_cast<std::ptrdiff_t>(end),
              padded.begin());
    Spectrum spec(fft_.spectrum_size());
    fft_.forward(padded, spec);
    return spec;
  }

  // Adds the convolution of one transformed block with one filter into `out`.
  void accumulate(const Spectrum& block_spec, const Spectrum& filter_spec, std::size_t block_index,
                  std::vector<double>& out, Spectrum& scratch, std::vector<double>& time) const {
    for (std::size_t k = 0; k < scratch.size(); ++k) scratch[k] = block_spec[k] * filter_spec[k];
    fft_.inverse(scratch, time);
    const std::size_t begin = block_index * block_;
    const std::size_t count = std::min(time.size(), out.size() - std::min(out.size(), begin));
    for (std::size_t i = 0; i < count; ++i) out[begin + i] += time[i];
  }

  std::size_t fft_size() const { return fft_.size(); }
  std::size_t filter_length() const { return filter_length_; }

 private:
  std::size_t filter_length_;
  detail::RealFft fft_;
  std::size_t block_;
};

// Full-length convolutions of each input with each filter. result[f][i].
std::vector<std::vector<std::vector<double>>> convolve_all(
    std::span<const std::span<const double>> inputs, std::span<const std::vector<double>> filters) {
  const std::size_t taps = filters.front().size();
  const OverlapAdd engine(taps);

  std::vector<Spectrum> filter_specs(filters.size());
  parallel_for(filters.size(), [&](std::size_t f) { filter_specs[f] = engine.filter_spectrum(filters[f]); });

  std::vector<std::vector<std::vector<double>>> out(filters.size(),
                                                    std::vector<std::vector<double>>(inputs.size()));
  std::size_t max_blocks = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const std::size_t length = inputs[i].empty() ? 0 : inputs[i].size() + taps - 1;
    for (auto& per_filter : out) per_filter[i].assign(length, 0.0);
    max_blocks = std::max(max_blocks, engine.block_count(inputs[i].size()));
  }

  for (std::size_t first = 0; first < max_blocks; first += kBlocksPerPass) {
    const std::size_t last = std::min(max_blocks, first + kBlocksPerPass);
    // spectra[i][b - first]
    std::vector<std::vector<Spectrum>> spectra(inputs.size());
    const std::size_t jobs = inputs.size() * (last - first);
    for (auto& s : spectra) s.resize(last - first);
    parallel_for(jobs, [&](std::size_t job) {
      const std::size_t i = job / (last - first);
      const std::size_t b = first + job % (last - first);
      if (b < engine.block_count(inputs[i].size())) spectra[i][b - first] = engine.block_spectrum(inputs[i], b);
    });

    parallel_for(filters.size() * inputs.size(), [&](std::size_t job) {
      const std::size_t f = job / inputs.size();
      const std::size_t i = job % inputs.size();
      Spectrum scratch(engine.spectrum_size());
      std::vector<double> time(engine.fft_size());
      const std::size_t blocks = std::min(last, engine.block_count(inputs[i].size()));
      for (std::size_t b = first; b < blocks; ++b) {
        engine.accumulate(spectra[i][b - first], filter_specs[f], b, out[f][i], scratch, time);
      }
    });
  }
  return out;
}

void check_lowpass_args(double cutoff_hz, std::size_t n_taps, double sample_rate) {
  if (!(sample_rate > 0.0)) throw ConfigError("sample rate must be > 0");
  if (n_taps == 0 || n_taps % 2 == 0) {
    throw ConfigError("tap count must be odd (type-I linear phase), got " + std::to_string(n_taps));
  }
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < 0.5 * sample_rate)) {
    throw ConfigError("lowpass cutoff must lie in (0, Nyquist)");
  }
}

bool same_edge(double a, double b, double scale) { return std::abs(a - b) <= 1e-9 * scale; }

}  // namespace

std::vector<BandSpec> leipp_bands(double sample_rate) {
  const double nyquist = 0.5 * sample_rate;
  if (!(nyquist > 15000.0)) {
    throw ConfigError("the Leipp mapping needs a Nyquist frequency above 15 kHz");
  }
  return {{1, 0.0, 50.0},       {2, 50.0, 200.0},      {3, 200.0, 400.0},     {4, 400.0, 800.0},
          {5, 800.0, 1200.0},   {6, 1200.0, 1800.0},   {7, 1800.0, 3000.0},   {8, 3000.0, 6000.0},
          {9, 6000.0, 15000.0}, {10, 15000.0, nyquist}};
}

std::vector<double> design_lowpass(double cutoff_hz, std::size_t n_taps, double sample_rate) {
  check_lowpass_args(cutoff_hz, n_taps, sample_rate);
  constexpr double pi = std::numbers::pi;
  const double fc = cutoff_hz / sample_rate;
  const std::size_t center = (n_taps - 1) / 2;
  std::vector<double> taps(n_taps, 0.0);
  if (n_taps == 1) {
    taps[0] = 1.0;
    return taps;
  }
  const double span = static_cast<double>(n_taps - 1);
  for (std::size_t n = 0; n <= center; ++n) {
    const double m = static_cast<double>(n) - static_cast<double>(center);
    const double ideal = m == 0.0 ? 2.0 * fc : std::sin(2.0 * pi * fc * m) / (pi * m);
    const double x = static_cast<double>(n) / span;
    const double window = 0.42 - 0.5 * std::cos(2.0 * pi * x) + 0.08 * std::cos(4.0 * pi * x);
    taps[n] = ideal * window;
    taps[n_taps - 1 - n] = taps[n];
  }
  // Pairwise sum from the tails keeps the result symmetric after scaling.
  double sum = taps[center];
  for (std::size_t n = 0; n < center; ++n) sum += 2.0 * taps[n];
  for (double& v : taps) v /= sum;
  return taps;
}

FilterBank build_bank(std::span<const BandSpec> mapping, std::size_t n_taps, double sample_rate) {
  if (!(sample_rate > 0.0)) throw ConfigError("sample rate must be > 0");
  if (n_taps == 0 || n_taps % 2 == 0) {
    throw ConfigError("tap count must be odd (type-I linear phase), got " + std::to_string(n_taps));
  }
  if (mapping.empty()) throw ConfigError("band mapping is empty");
  const double nyquist = 0.5 * sample_rate;
  if (mapping.front().low_hz != 0.0) throw ConfigError("band mapping must start at 0 Hz");
  if (!same_edge(mapping.back().high_hz, nyquist, nyquist)) {
    throw ConfigError("band mapping must end at Nyquist");
  }
  for (std::size_t k = 0; k < mapping.size(); ++k) {
    if (mapping[k].index != static_cast<int>(k + 1)) throw ConfigError("band indices must run 1..n in order");
    if (!(mapping[k].high_hz > mapping[k].low_hz)) {
      throw ConfigError("band " + std::to_string(k + 1) + " has an empty range");
    }
    if (k + 1 < mapping.size() && mapping[k].high_hz != mapping[k + 1].low_hz) {
      throw ConfigError("band mapping is not contiguous between bands " + std::to_string(k + 1) + " and " +
                        std::to_string(k + 2));
    }
  }

  const std::size_t center = (n_taps - 1) / 2;
  auto lowpass_at = [&](double edge) {
    if (edge == 0.0) return std::vector<double>(n_taps, 0.0);
    if (same_edge(edge, nyquist, nyquist)) {
      std::vector<double> impulse(n_taps, 0.0);
      impulse[center] = 1.0;
      return impulse;
    }
    return design_lowpass(edge, n_taps, sample_rate);
  };

  // edges[k] is the lowpass at mapping[k].low_hz; edges.back() at Nyquist.
  std::vector<std::vector<double>> edges(mapping.size() + 1);
  parallel_for(edges.size(), [&](std::size_t k) {
    edges[k] = lowpass_at(k < mapping.size() ? mapping[k].low_hz : mapping.back().high_hz);
  });

  FilterBank bank;
  bank.sample_rate = sample_rate;
  bank.bands.assign(mapping.begin(), mapping.end());
  bank.bands.back().high_hz = nyquist;
  bank.taps.resize(mapping.size());
  for (std::size_t k = 0; k < mapping.size(); ++k) {
    auto& taps = bank.taps[k];
    taps.resize(n_taps);
    for (std::size_t n = 0; n < n_taps; ++n) taps[n] = edges[k + 1][n] - edges[k][n];
  }
  return bank;
}

const StereoBuffer& SubbandStereo::band(int index) const {
  if (index < 1 || index > static_cast<int>(bands.size())) {
    throw ConfigError("band index " + std::to_string(index) + " out of range");
  }
  return bands[static_cast<std::size_t>(index - 1)];
}

SubbandStereo analyze(const StereoBuffer& input, const FilterBank& bank, AnalyzeOptions options) {
  if (input.sample_rate != bank.sample_rate) {
    throw ConfigError("analyze: input sample rate " + std::to_string(input.sample_rate) +
                      " differs from filter bank rate " + std::to_string(bank.sample_rate));
  }
  if (input.left.size() != input.right.size()) throw Error("analyze: channel lengths differ");
  if (bank.taps.empty()) throw Error("analyze: empty filter bank");

  const std::size_t frames = input.frames();
  const std::size_t delay = bank.group_delay();
  const std::span<const double> channels[] = {input.left, input.right};
  auto full = convolve_all(channels, bank.taps);

  SubbandStereo out;
  out.specs = bank.bands;
  out.group_delay = delay;
  out.delay_compensated = options.compensate_delay;
  out.bands.resize(bank.taps.size());
  for (std::size_t k = 0; k < bank.taps.size(); ++k) {
    StereoBuffer& band = out.bands[k];
    band.sample_rate = input.sample_rate;
    if (options.compensate_delay) {
      auto trim = [&](const std::vector<double>& conv) {
        if (conv.empty()) return std::vector<double>(frames, 0.0);
        return std::vector<double>(conv.begin() + static_cast<std::ptrdiff_t>(delay),
                                   conv.begin() + static_cast<std::ptrdiff_t>(delay + frames));
      };
      band.left = trim(full[k][0]);
      band.right = trim(full[k][1]);
    } else {
      band.left = std::move(full[k][0]);
      band.right = std::move(full[k][1]);
    }
  }
  return out;
}

StereoBuffer resynthesize(const SubbandStereo& subbands, std::span<const int> selection) {
  if (selection.empty()) throw ConfigError("resynthesize: empty band selection");
  const std::set<int> unique(selection.begin(), selection.end());
  for (int index : unique) subbands.band(index);

  const StereoBuffer& first = subbands.band(*unique.begin());
  StereoBuffer out(first.frames(), first.sample_rate);
  for (int index : unique) {
    const StereoBuffer& band = subbands.band(index);
    if (band.frames() != out.frames()) throw Error("resynthesize: band lengths differ");
    for (std::size_t i = 0; i < out.frames(); ++i) {
      out.left[i] += band.left[i];
      out.right[i] += band.right[i];
    }
  }
  return out;
}

std::vector<double> fast_convolve(std::span<const double> x, std::span<const double> h) {
  if (x.empty() || h.empty()) return {};
  const std::span<const double> inputs[] = {x};
  const std::vector<double> filters[] = {std::vector<double>(h.begin(), h.end())};
  auto out = convolve_all(inputs, filters);
  return std::move(out[0][0]);
}

}  // namespace stereocarto
