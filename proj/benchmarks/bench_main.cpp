#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "stereocarto/cartography.hpp"
#include "stereocarto/filterbank.hpp"
#include "stereocarto/pipeline.hpp"
#include "stereocarto/renderer.hpp"

namespace sc = stereocarto;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  std::vector<double> x(n);
  for (double& v : x) v = d(rng);
  return x;
}

sc::StereoBuffer stereo_noise(double seconds) {
  const auto n = static_cast<std::size_t>(seconds * 44100.0);
  sc::StereoBuffer b;
  b.sample_rate = 44100.0;
  b.left = noise(n, 1);
  b.right = noise(n, 2);
  return b;
}

void BM_FastConvolve(benchmark::State& state) {
  const auto x = noise(static_cast<std::size_t>(state.range(0)), 3);
  const auto h = sc::design_lowpass(1000.0, 8191, 44100.0);
  for (auto _ : state) benchmark::DoNotOptimize(sc::fast_convolve(x, h));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FastConvolve)->Arg(44100)->Arg(441000)->Unit(benchmark::kMillisecond);

void BM_Analyze(benchmark::State& state) {
  const auto input = stereo_noise(static_cast<double>(state.range(0)));
  const auto bank = sc::build_bank(sc::leipp_bands(44100.0), sc::kDefaultTaps, 44100.0);
  for (auto _ : state) benchmark::DoNotOptimize(sc::analyze(input, bank));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(input.frames()));
}
BENCHMARK(BM_Analyze)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_EstimateFrame(benchmark::State& state) {
  const auto x = noise(2205 + 20, 4);
  std::vector<double> left(x.begin() + 20, x.end()), right(x.begin() + 5, x.end() - 15);
  for (auto _ : state) benchmark::DoNotOptimize(sc::estimate_frame(left, right, 44100.0));
}
BENCHMARK(BM_EstimateFrame);

void BM_RenderCircle(benchmark::State& state) {
  sc::PointSource src;
  src.clip = {noise(441000, 5), 44100.0};
  src.trajectory = sc::CircleMotion{1.0, 0.0, 36.0};
  sc::RenderConfig cfg;
  cfg.interpolator_half_width = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sc::render_source(src, sc::MicPair{}, cfg, 10.0));
}
BENCHMARK(BM_RenderCircle)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Cartography(benchmark::State& state) {
  const auto input = stereo_noise(10.0);
  for (auto _ : state) benchmark::DoNotOptimize(sc::run_cartography(input, sc::MicPair{}));
}
BENCHMARK(BM_Cartography)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
