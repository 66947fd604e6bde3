#include "stereocarto/pipeline.hpp"

namespace stereocarto {

SubbandStereo decompose(const StereoBuffer& input, std::size_t taps, bool compensate_delay) {
  const auto mapping = leipp_bands(input.sample_rate);
  const FilterBank bank = build_bank(mapping, taps, input.sample_rate);
  return analyze(input, bank, {compensate_delay});
}

CartographyResult run_cartography(const StereoBuffer& input, const MicPair& mic, const AnalysisConfig& config) {
  CartographyResult out;
  out.subbands = decompose(input, config.taps, true);
  out.laws = temporal_laws(out.subbands, config.law);
  for (const TemporalLaw& law : out.laws) {
    out.delay_histograms.push_back(histogram_1d(law, CueAxis::delay, config.histogram));
    out.attenuation_histograms.push_back(histogram_1d(law, CueAxis::attenuation, config.histogram));
  }
  out.global_delay = global_histogram(out.delay_histograms);
  out.global_attenuation = global_histogram(out.attenuation_histograms);

  CandidateConfig candidates = config.candidates;
  candidates.histogram = config.histogram;
  out.candidates = extract_candidates(out.laws, mic, candidates);
  return out;
}

}  // namespace stereocarto
