#pragma once

// End-to-end analysis: Leipp subbands -> temporal laws -> histograms ->
// source candidates.

#include <cstddef>
#include <vector>

#include "stereocarto/cartography.hpp"
#include "stereocarto/filterbank.hpp"

namespace stereocarto {

struct AnalysisConfig {
  std::size_t taps = kDefaultTaps;
  LawConfig law;
  HistogramConfig histogram;
  CandidateConfig candidates;  // its histogram settings are replaced by `histogram`
};

struct CartographyResult {
  SubbandStereo subbands;
  std::vector<TemporalLaw> laws;
  std::vector<Histogram> delay_histograms;        // one per band
  std::vector<Histogram> attenuation_histograms;  // one per band
  Histogram global_delay;
  Histogram global_attenuation;
  std::vector<SourceCandidate> candidates;
};

/// Leipp filter bank analysis with the given tap count.
SubbandStereo decompose(const StereoBuffer& input, std::size_t taps = kDefaultTaps, bool compensate_delay = true);

CartographyResult run_cartography(const StereoBuffer& input, const MicPair& mic, const AnalysisConfig& config = {});

}  // namespace stereocarto
