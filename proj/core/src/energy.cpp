#include "stereocarto/energy.hpp"

#include <cmath>

namespace stereocarto {
namespace {

ChannelProfile channel_profile(const SubbandStereo& subbands, std::span<const double> original,
                               std::vector<double> StereoBuffer::*channel) {
  ChannelProfile out;
  out.original_isd = isd(original);
  out.band_isd.reserve(subbands.bands.size());
  for (const StereoBuffer& band : subbands.bands) out.band_isd.push_back(isd(band.*channel));
  out.defined = out.original_isd > 0.0;
  if (out.defined) {
    out.ratio_db.reserve(out.band_isd.size());
    for (double e : out.band_isd) out.ratio_db.push_back(10.0 * std::log10(e / out.original_isd));
  }
  return out;
}

}  // namespace

double isd(std::span<const double> signal) {
  double sum = 0.0;
  for (double v : signal) sum += v * v;
  return sum;
}

IsdProfile isd_profile(const SubbandStereo& subbands, const StereoBuffer& original) {
  IsdProfile out;
  out.bands = subbands.specs;
  out.left = channel_profile(subbands, original.left, &StereoBuffer::left);
  out.right = channel_profile(subbands, original.right, &StereoBuffer::right);
  return out;
}

}  // namespace stereocarto
