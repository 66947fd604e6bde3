#include "stereocarto/csv_export.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>

#include "stereocarto/error.hpp"

namespace stereocarto {
namespace {

std::string number(double v, int decimals) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::string s = fmt::format("{:.{}f}", v, decimals);
  if (s.find_first_not_of("-0.") == std::string::npos) s = fmt::format("{:.{}f}", 0.0, decimals);  // no "-0.000"
  return s;
}

}  // namespace

std::string format_law_csv(const TemporalLaw& law) {
  std::string out = "time_s,delta_t_ms,delta_e_db,corr,valid\n";
  for (const FrameEstimate& f : law.frames) {
    out += fmt::format("{},{},{},{},{}\n", number(f.time_s, 6), number(f.delta_t_s * 1e3, 6),
                       number(f.delta_e_db, 4), number(f.peak_correlation, 6), f.valid ? 1 : 0);
  }
  return out;
}

std::string format_histogram_csv(const Histogram& histogram) {
  std::string out = "bin_center,count\n";
  const bool delay = histogram.axis == CueAxis::delay;
  for (std::size_t i = 0; i < histogram.counts.size(); ++i) {
    const double center = histogram.bins.center(i) * (delay ? 1e3 : 1.0);
    out += fmt::format("{},{}\n", number(center, delay ? 6 : 4), histogram.counts[i]);
  }
  return out;
}

std::string format_candidates_csv(std::span<const SourceCandidate> candidates) {
  std::string out = "delta_t_ms,delta_e_db,support,bands,dist_m,az_deg,residual\n";
  for (const SourceCandidate& c : candidates) {
    std::string bands;
    for (int b : c.bands) bands += (bands.empty() ? "" : ";") + std::to_string(b);
    std::string located = ",,";
    if (c.location) {
      located = fmt::format("{},{},{}", number(c.location->position.distance_m, 4),
                            number(c.location->position.azimuth_deg, 3), fmt::format("{:.3e}", c.location->residual));
    }
    out += fmt::format("{},{},{},{},{}\n", number(c.delta_t_s * 1e3, 6), number(c.delta_e_db, 4), c.support, bands,
                       located);
  }
  return out;
}

std::string format_isd_csv(const IsdProfile& profile) {
  std::string out = "band,low_hz,high_hz,left_db,right_db\n";
  for (std::size_t k = 0; k < profile.bands.size(); ++k) {
    const BandSpec& b = profile.bands[k];
    const std::string left = profile.left.defined ? number(profile.left.ratio_db[k], 4) : "";
    const std::string right = profile.right.defined ? number(profile.right.ratio_db[k], 4) : "";
    out += fmt::format("{},{:g},{:g},{},{}\n", b.index, b.low_hz, b.high_hz, left, right);
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

std::string band_wav_name(const BandSpec& band) {
  return fmt::format("band_{:02d}_{:g}-{:g}.wav", band.index, band.low_hz, band.high_hz);
}

std::string law_csv_name(int band) { return fmt::format("law_band_{:02d}.csv", band); }

std::string histogram_csv_name(const Histogram& histogram) {
  const char* axis = histogram.axis == CueAxis::delay ? "delay" : "attenuation";
  if (!histogram.band) return fmt::format("hist_{}_global.csv", axis);
  return fmt::format("hist_{}_band_{:02d}.csv", axis, *histogram.band);
}

}  // namespace stereocarto
