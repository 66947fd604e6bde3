#pragma once

// Integrated Spectral Density (sum of squared samples) and per-band weight
// profiles relative to the original channel.

#include <span>
#include <vector>

#include "stereocarto/filterbank.hpp"

namespace stereocarto {

double isd(std::span<const double> signal);

struct ChannelProfile {
  bool defined = false;           // false when the original channel is silent
  double original_isd = 0.0;
  std::vector<double> band_isd;   // raw energies, one per band
  std::vector<double> ratio_db;   // 10 log10(band / original); empty when undefined
};

struct IsdProfile {
  std::vector<BandSpec> bands;
  ChannelProfile left;
  ChannelProfile right;
};

IsdProfile isd_profile(const SubbandStereo& subbands, const StereoBuffer& original);

}  // namespace stereocarto
