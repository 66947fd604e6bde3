#pragma once

// Scene builders and small helpers shared by the unit and acceptance tests.

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "stereocarto/filterbank.hpp"
#include "stereocarto/geometry.hpp"
#include "stereocarto/renderer.hpp"

namespace testing_support {

inline constexpr double kRate = 44100.0;

// White noise band-limited to [low, high] Hz with a 2047-tap difference of
// lowpasses. low = 0 gives a lowpass.
inline std::vector<double> band_noise(std::size_t n, double low_hz, double high_hz, std::uint64_t seed,
                                      double rate = kRate) {
  constexpr std::size_t taps = 2047;
  const auto white = oracle::white_noise(n + taps, seed);
  std::vector<double> h = stereocarto::design_lowpass(high_hz, taps, rate);
  if (low_hz > 0.0) {
    const auto lo = stereocarto::design_lowpass(low_hz, taps, rate);
    for (std::size_t i = 0; i < taps; ++i) h[i] -= lo[i];
  }
  auto y = stereocarto::fast_convolve(white, h);
  y.erase(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(taps));
  y.resize(n);
  double peak = 0.0;
  for (double v : y) peak = std::max(peak, std::abs(v));
  for (double& v : y) v *= 0.5 / peak;
  return y;
}

inline stereocarto::PointSource point_source(std::string name, std::vector<double> samples,
                                             stereocarto::Trajectory trajectory, double rate = kRate) {
  stereocarto::PointSource s;
  s.name = std::move(name);
  s.clip = {std::move(samples), rate};
  s.trajectory = std::move(trajectory);
  return s;
}

inline stereocarto::Scene static_noise_scene(double distance_m, double azimuth_deg, double seconds,
                                             std::uint64_t seed = 7) {
  stereocarto::Scene scene;
  scene.sample_rate = kRate;
  scene.duration_s = seconds;
  const auto n = static_cast<std::size_t>(seconds * kRate);
  scene.sources.push_back(point_source("noise", oracle::white_noise(n, seed),
                                       stereocarto::FixedPosition{{distance_m, azimuth_deg}}));
  return scene;
}

inline stereocarto::Scene circle_scene(double radius_m, double start_deg, double speed_deg_s, double seconds,
                                       std::uint64_t seed = 11) {
  stereocarto::Scene scene;
  scene.sample_rate = kRate;
  scene.duration_s = seconds;
  const auto n = static_cast<std::size_t>(seconds * kRate);
  scene.sources.push_back(point_source("organ", oracle::white_noise(n, seed),
                                       stereocarto::CircleMotion{radius_m, start_deg, speed_deg_s}));
  return scene;
}

struct QuartetMember {
  const char* name;
  double distance_m;
  double azimuth_deg;
  double low_hz;
  double high_hz;
  int band;
};

// Four stems, each confined to one Leipp band, at the four quartet positions.
inline const std::vector<QuartetMember>& quartet_members() {
  static const std::vector<QuartetMember> members = {
      {"bass", 1.0, -10.0, 70.0, 160.0, 2},
      {"lead guitar", 0.5, 40.0, 470.0, 730.0, 4},
      {"banjo", 1.5, -35.0, 870.0, 1130.0, 5},
      {"guitar", 1.0, 25.0, 7000.0, 13000.0, 9},
  };
  return members;
}

inline stereocarto::Scene quartet_scene(double seconds) {
  stereocarto::Scene scene;
  scene.sample_rate = kRate;
  scene.duration_s = seconds;
  const auto n = static_cast<std::size_t>(seconds * kRate);
  std::uint64_t seed = 100;
  for (const auto& m : quartet_members()) {
    scene.sources.push_back(point_source(m.name, band_noise(n, m.low_hz, m.high_hz, ++seed),
                                         stereocarto::FixedPosition{{m.distance_m, m.azimuth_deg}}));
  }
  return scene;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() / (tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Rows of a comma-separated file, header included. Empty cells are kept.
inline std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace testing_support
