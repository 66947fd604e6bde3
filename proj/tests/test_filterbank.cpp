#include <doctest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "scenes.hpp"
#include "stereocarto/cartography.hpp"
#include "stereocarto/error.hpp"
#include "stereocarto/filterbank.hpp"

namespace sc = stereocarto;
namespace ts = testing_support;

namespace {

const sc::FilterBank& default_bank() {
  static const auto bank = sc::build_bank(sc::leipp_bands(ts::kRate), sc::kDefaultTaps, ts::kRate);
  return bank;
}

sc::StereoBuffer stereo(std::vector<double> l, std::vector<double> r) {
  sc::StereoBuffer b;
  b.left = std::move(l);
  b.right = std::move(r);
  b.sample_rate = ts::kRate;
  return b;
}

}  // namespace

TEST_CASE("leipp_bands") {
  const auto bands = sc::leipp_bands(44100.0);
  const double edges[] = {0, 50, 200, 400, 800, 1200, 1800, 3000, 6000, 15000, 22050};
  REQUIRE(bands.size() == 10);
  for (std::size_t k = 0; k < 10; ++k) {
    CHECK(bands[k].index == static_cast<int>(k + 1));
    CHECK(bands[k].low_hz == edges[k]);
    CHECK(bands[k].high_hz == edges[k + 1]);
  }
  CHECK(sc::leipp_bands(48000.0).back().high_hz == 24000.0);
  CHECK_THROWS_AS(sc::leipp_bands(22050.0), sc::ConfigError);
}

TEST_CASE("design_lowpass") {
  SUBCASE("symmetric with unit DC gain") {
    for (double fc : {50.0, 1000.0, 15000.0}) {
      const auto h = sc::design_lowpass(fc, 8191, 44100.0);
      REQUIRE(h.size() == 8191);
      for (std::size_t k = 0; k < h.size(); ++k) CHECK(h[k] == h[h.size() - 1 - k]);
      long double sum = 0.0L;
      for (double v : h) sum += v;
      CHECK(std::abs(static_cast<double>(sum) - 1.0) < 1e-14);
    }
  }
  SUBCASE("-6 dB at the cutoff") {
    const auto h = sc::design_lowpass(1000.0, 8191, 44100.0);
    CHECK(std::abs(oracle::db(oracle::dtft_magnitude(h, 1000.0, 44100.0)) + 6.02) <= 0.1);
    for (double fc : {200.0, 3000.0, 15000.0}) {
      const auto g = sc::design_lowpass(fc, 8191, 44100.0);
      CAPTURE(fc);
      CHECK(oracle::dtft_magnitude(g, 0.99 * fc, 44100.0) > 0.5);
      CHECK(oracle::dtft_magnitude(g, 1.01 * fc, 44100.0) < 0.5);
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(sc::design_lowpass(1000.0, 8190, 44100.0), sc::ConfigError);
    CHECK_THROWS_AS(sc::design_lowpass(0.0, 101, 44100.0), sc::ConfigError);
    CHECK_THROWS_AS(sc::design_lowpass(22050.0, 101, 44100.0), sc::ConfigError);
  }
}

TEST_CASE("build_bank") {
  const auto& bank = default_bank();
  REQUIRE(bank.taps.size() == 10);
  CHECK(bank.n_taps() == 8191);
  CHECK(bank.group_delay() == 4095);

  SUBCASE("bands telescope to a delayed impulse") {
    double worst = 0.0;
    for (std::size_t i = 0; i < bank.n_taps(); ++i) {
      double s = 0.0;
      for (const auto& t : bank.taps) s += t[i];
      worst = std::max(worst, std::abs(s - (i == 4095 ? 1.0 : 0.0)));
    }
    CHECK(worst < 1e-12);
  }
  SUBCASE("linear phase") {
    for (const auto& t : bank.taps) {
      for (std::size_t k = 0; k < t.size(); ++k) REQUIRE(t[k] == t[t.size() - 1 - k]);
    }
  }
  SUBCASE("band 1 is the 50 Hz lowpass") {
    CHECK(bank.taps[0] == sc::design_lowpass(50.0, 8191, 44100.0));
  }
  SUBCASE("top bands around 20 kHz") {
    CHECK(oracle::db(oracle::dtft_magnitude(bank.taps[9], 20000.0, 44100.0)) > -1.0);
    CHECK(oracle::db(oracle::dtft_magnitude(bank.taps[8], 20000.0, 44100.0)) < -60.0);
  }
  SUBCASE("passband gain at band centers") {
    for (std::size_t k = 1; k < 10; ++k) {
      const auto& b = bank.bands[k];
      const double f = std::sqrt(b.low_hz * b.high_hz);
      CHECK(std::abs(oracle::db(oracle::dtft_magnitude(bank.taps[k], f, 44100.0))) < 0.01);
    }
  }
  SUBCASE("mapping errors") {
    auto m = sc::leipp_bands(44100.0);
    m[3].low_hz = 410.0;
    CHECK_THROWS_AS(sc::build_bank(m, 101, 44100.0), sc::ConfigError);
    m = sc::leipp_bands(44100.0);
    m.back().high_hz = 20000.0;
    CHECK_THROWS_AS(sc::build_bank(m, 101, 44100.0), sc::ConfigError);
    m = sc::leipp_bands(44100.0);
    m.erase(m.begin());
    CHECK_THROWS_AS(sc::build_bank(m, 101, 44100.0), sc::ConfigError);
    CHECK_THROWS_AS(sc::build_bank(sc::leipp_bands(44100.0), 100, 44100.0), sc::ConfigError);
  }
  SUBCASE("any contiguous mapping") {
    const std::vector<sc::BandSpec> two = {{1, 0.0, 1000.0}, {2, 1000.0, 22050.0}};
    const auto b = sc::build_bank(two, 255, 44100.0);
    for (std::size_t i = 0; i < 255; ++i) CHECK(std::abs(b.taps[0][i] + b.taps[1][i] - (i == 127 ? 1.0 : 0.0)) < 1e-15);
  }
}

TEST_CASE("fast convolution equals direct convolution") {
  const auto x = oracle::white_noise(10000, 21);
  const auto& h = default_bank().taps[4];
  const auto fast = sc::fast_convolve(x, h);
  const auto direct = oracle::direct_convolve(x, h);
  REQUIRE(fast.size() == direct.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < fast.size(); ++i) worst = std::max(worst, std::abs(fast[i] - direct[i]));
  CHECK(worst < 1e-9);

  const auto short_h = oracle::white_noise(37, 22);
  const auto a = sc::fast_convolve(x, short_h), b = oracle::direct_convolve(x, short_h);
  worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  CHECK(worst < 1e-12);
  CHECK(sc::fast_convolve({}, short_h).empty());
}

TEST_CASE("analyze matches direct convolution on every band") {
  const auto l = oracle::white_noise(10000, 31), r = oracle::white_noise(10000, 32);
  const auto in = stereo(l, r);
  const auto comp = sc::analyze(in, default_bank());
  const auto raw = sc::analyze(in, default_bank(), {.compensate_delay = false});
  CHECK(comp.delay_compensated);
  CHECK_FALSE(raw.delay_compensated);
  CHECK(comp.group_delay == 4095);
  for (std::size_t k : {0u, 4u, 9u}) {
    const auto dl = oracle::direct_convolve(l, default_bank().taps[k]);
    const auto dr = oracle::direct_convolve(r, default_bank().taps[k]);
    REQUIRE(raw.bands[k].frames() == dl.size());
    REQUIRE(comp.bands[k].frames() == l.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < dl.size(); ++i) {
      worst = std::max({worst, std::abs(raw.bands[k].left[i] - dl[i]), std::abs(raw.bands[k].right[i] - dr[i])});
    }
    for (std::size_t i = 0; i < l.size(); ++i) {
      worst = std::max({worst, std::abs(comp.bands[k].left[i] - dl[i + 4095]),
                        std::abs(comp.bands[k].right[i] - dr[i + 4095])});
    }
    CAPTURE(k);
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("perfect-sum property on random input") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto in = stereo(oracle::white_noise(30000, seed), ts::band_noise(30000, 30.0, 9000.0, seed + 10));
    const auto raw = sc::analyze(in, default_bank(), {.compensate_delay = false});
    const std::vector<int> all = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    const auto sum = sc::resynthesize(raw, all);
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < sum.frames(); ++i) {
      const double expect = i >= 4095 && i - 4095 < in.frames() ? in.left[i - 4095] : 0.0;
      err = std::max(err, std::abs(sum.left[i] - expect));
      ref = std::max(ref, std::abs(expect));
    }
    CHECK(err / ref < 1e-9);
  }
}

TEST_CASE("white noise spreads energy by bandwidth") {
  const std::size_t n = 20 * 44100;
  const auto noise = oracle::white_noise(n, 77);
  const auto sub = sc::analyze(stereo(noise, noise), default_bank());
  const double total = oracle::energy(noise);
  double sum = 0.0;
  for (std::size_t k = 0; k < 10; ++k) {
    const auto& b = sub.specs[k];
    const double e = oracle::energy(sub.bands[k].left);
    sum += e;
    CAPTURE(b.index);
    CHECK(std::abs(10.0 * std::log10(e / total) - 10.0 * std::log10((b.high_hz - b.low_hz) / 22050.0)) <= 0.5);
  }
  CHECK(std::abs(10.0 * std::log10(sum / total)) <= 0.2);
}

TEST_CASE("a 1 kHz sine lands in band 5") {
  const std::size_t n = 2 * 44100;
  const auto s = oracle::sine(n, 1000.0, 44100.0);
  const auto sub = sc::analyze(stereo(s, s), default_bank());
  double total = 0.0;
  for (const auto& b : sub.bands) total += oracle::energy(b.left);
  CHECK(oracle::energy(sub.band(5).left) / total >= 0.99);
}

TEST_CASE("zero input gives zero bands") {
  const sc::StereoBuffer zero(5000, 44100.0);
  const auto sub = sc::analyze(zero, default_bank());
  for (const auto& b : sub.bands) {
    CHECK(std::all_of(b.left.begin(), b.left.end(), [](double v) { return v == 0.0; }));
    CHECK(std::all_of(b.right.begin(), b.right.end(), [](double v) { return v == 0.0; }));
  }
}

TEST_CASE("analyze rejects a sample-rate mismatch") {
  sc::StereoBuffer in(1000, 48000.0);
  CHECK_THROWS_AS(sc::analyze(in, default_bank()), sc::ConfigError);
}

TEST_CASE("resynthesize") {
  const auto l = oracle::white_noise(44100, 5), r = ts::band_noise(44100, 100.0, 4000.0, 6);
  const auto sub = sc::analyze(stereo(l, r), default_bank());

  SUBCASE("all bands reconstruct the input") {
    const std::vector<int> all = {10, 9, 8, 7, 6, 5, 4, 3, 2, 1};
    const auto out = sc::resynthesize(sub, all);
    double err = 0.0;
    for (std::size_t i = 0; i < out.frames(); ++i) err += std::pow(out.left[i] - l[i], 2) + std::pow(out.right[i] - r[i], 2);
    CHECK(10.0 * std::log10((oracle::energy(l) + oracle::energy(r)) / err) > 100.0);
  }
  SUBCASE("a single band is returned unchanged") {
    const std::vector<int> one = {7};
    const auto out = sc::resynthesize(sub, one);
    CHECK(out.left == sub.band(7).left);
    CHECK(out.right == sub.band(7).right);
  }
  SUBCASE("all but band 10 leaves band 10 as the residual") {
    const std::vector<int> nine = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    const std::vector<int> all = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    const auto partial = sc::resynthesize(sub, nine);
    const auto full = sc::resynthesize(sub, all);
    for (std::size_t i = 0; i < full.frames(); ++i) {
      REQUIRE(std::abs(full.left[i] - partial.left[i] - sub.band(10).left[i]) < 1e-12);
    }
  }
  SUBCASE("duplicates count once") {
    const std::vector<int> dup = {3, 3};
    CHECK(sc::resynthesize(sub, dup).left == sub.band(3).left);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(sc::resynthesize(sub, std::vector<int>{}), sc::ConfigError);
    CHECK_THROWS_AS(sc::resynthesize(sub, std::vector<int>{11}), sc::ConfigError);
    CHECK_THROWS_AS(sc::resynthesize(sub, std::vector<int>{0}), sc::ConfigError);
  }
}

TEST_CASE("mono-identical stereo shows zero delay in every band") {
  const auto x = oracle::white_noise(3 * 44100, 8);
  const auto sub = sc::analyze(stereo(x, x), default_bank());
  for (const auto& band : sub.bands) {
    const auto law = sc::temporal_law(band, 0, {});
    for (const auto& f : law.frames) {
      CHECK(std::abs(f.delta_t_s) < 1e-15);
      CHECK(std::abs(f.delta_e_db) < 1e-12);
    }
  }
}
