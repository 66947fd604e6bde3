#pragma once

// Plot-ready CSV exports. Delays are written in milliseconds, levels in dB.
// Number formatting is fixed so identical inputs give byte-identical files.

#include <filesystem>
#include <span>
#include <string>

#include "stereocarto/cartography.hpp"
#include "stereocarto/energy.hpp"

namespace stereocarto {

/// time_s,delta_t_ms,delta_e_db,corr,valid
std::string format_law_csv(const TemporalLaw& law);
/// bin_center,count  (bin_center in ms for delay, dB for attenuation)
std::string format_histogram_csv(const Histogram& histogram);
/// delta_t_ms,delta_e_db,support,bands,dist_m,az_deg,residual
/// bands are ';'-separated; location columns are empty when not located.
std::string format_candidates_csv(std::span<const SourceCandidate> candidates);
/// band,low_hz,high_hz,left_db,right_db  (empty cell for an undefined channel)
std::string format_isd_csv(const IsdProfile& profile);

void write_text(const std::filesystem::path& path, const std::string& text);

/// band_07_1800-3000.wav
std::string band_wav_name(const BandSpec& band);
/// law_band_07.csv
std::string law_csv_name(int band);
/// hist_delay_band_07.csv, hist_attenuation_global.csv
std::string histogram_csv_name(const Histogram& histogram);

}  // namespace stereocarto
