#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "cli/commands.hpp"
#include "oracles.hpp"
#include "scenes.hpp"
#include "stereocarto/csv_export.hpp"
#include "stereocarto/manifest.hpp"
#include "stereocarto/wav.hpp"

namespace sc = stereocarto;
namespace ts = testing_support;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = sc::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

int exe(const std::string& args, const fs::path& log) {
  const std::string command = std::string("\"") + STEREOCARTO_EXE + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Bass noise at (1 m, +45 deg) and a tone on a circle, one second long.
fs::path write_scene(const fs::path& dir) {
  sc::write_wav(dir / "bass.wav", sc::MonoClip{ts::band_noise(44100, 60.0, 400.0, 1), 44100.0}, sc::SampleFormat::float32);
  sc::write_wav(dir / "tone.wav", sc::MonoClip{oracle::sine(44100, 2500.0, 44100.0, 0.3), 44100.0},
                sc::SampleFormat::pcm24);
  sc::write_text(dir / "scene.json", R"({
  "sample_rate": 44100,
  "duration_s": 1.0,
  "sources": [
    {"name": "bass", "clip": "bass.wav",
     "trajectory": {"kind": "static", "distance_m": 1, "azimuth_deg": 45}},
    {"name": "tone", "clip": "tone.wav", "gain_db": -3,
     "trajectory": {"kind": "circle", "radius_m": 1.5, "angular_speed_deg_s": 90}}
  ]
}
)");
  return dir / "scene.json";
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(cli({}).code == 1);
  CHECK(cli({"frobnicate"}).code == 1);
  CHECK(cli({"laws", "--in", "x.wav"}).code == 1);
  CHECK(cli({"simulate", "--scene", "s.json", "--out", "o.wav", "--bit-depth", "12"}).code == 1);
  CHECK(cli({"hist", "--in", "x.wav", "--out-dir", "d", "--band", "2", "--global"}).code == 1);
  const auto help = cli({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("carto") != std::string::npos);
  const auto version = cli({"--version"});
  CHECK(version.code == 0);
  CHECK(version.out.find(sc::tool_version()) != std::string::npos);
}

TEST_CASE("an invalid scene is reported with its field") {
  ts::TempDir dir("cli_bad");
  write_scene(dir.path);
  sc::write_text(dir.path / "bad.json", R"({"sample_rate": 44100, "duration_s": 1, "sources": [
    {"clip": "bass.wav", "trajectory": {"kind": "static", "distance_m": -1, "azimuth_deg": 0}}]})");
  const auto r = cli({"simulate", "--scene", (dir.path / "bad.json").string(), "--out", (dir.path / "o.wav").string()});
  CHECK(r.code != 0);
  CHECK(r.err.find("sources[0]") != std::string::npos);
  CHECK_FALSE(fs::exists(dir.path / "o.wav"));

  sc::write_text(dir.path / "syntax.json", "{\"sample_rate\": 44100,\n\"sources\": [}");
  const auto s = cli({"simulate", "--scene", (dir.path / "syntax.json").string(), "--out", (dir.path / "o.wav").string()});
  CHECK(s.code == 1);
  CHECK(s.err.find("line 2") != std::string::npos);
}

TEST_CASE("processing failures exit with 2") {
  ts::TempDir dir("cli_fail");
  auto r = cli({"carto", "--in", (dir.path / "missing.wav").string(), "--out", (dir.path / "c.csv").string()});
  CHECK(r.code == 2);
  CHECK_FALSE(r.err.empty());
  sc::write_wav(dir.path / "mono.wav", sc::MonoClip{oracle::white_noise(4410, 1), 44100.0}, sc::SampleFormat::pcm16);
  r = cli({"isd", "--in", (dir.path / "mono.wav").string(), "--out", (dir.path / "i.csv").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("num_channels") != std::string::npos);
}

TEST_CASE("bad analysis options exit with 1") {
  ts::TempDir dir("cli_opts");
  const std::vector<std::vector<double>> ch = {oracle::white_noise(44100, 1), oracle::white_noise(44100, 1)};
  sc::write_wav(dir.path / "in.wav", ch, 44100.0, sc::SampleFormat::float32);
  const std::string in = (dir.path / "in.wav").string();
  CHECK(cli({"hist", "--in", in, "--out-dir", (dir.path / "h").string(), "--band", "11"}).code == 1);
  CHECK(cli({"bands", "--in", in, "--out-dir", (dir.path / "b").string(), "--taps", "100"}).code == 1);
  CHECK(cli({"hist", "--in", in, "--out-dir", (dir.path / "h").string(), "--delay-bin-us", "0"}).code == 1);
  CHECK(cli({"resynth", "--bands", dir.path.string(), "--select", "1,x", "--out", (dir.path / "r.wav").string()}).code == 1);
}

TEST_CASE("pipeline through the CLI") {
  ts::TempDir dir("cli_flow");
  const auto scene = write_scene(dir.path);
  const std::string mix = (dir.path / "sim" / "mix.wav").string();

  REQUIRE(cli({"simulate", "--scene", scene.string(), "--out", mix}).code == 0);
  CHECK(fs::exists(dir.path / "sim" / "run.json"));
  const auto rendered = sc::read_wav(mix);
  CHECK(rendered.format == sc::SampleFormat::float32);
  CHECK(rendered.frames() == 44100);

  SUBCASE("bands then resynth nulls against the input") {
    REQUIRE(cli({"bands", "--in", mix, "--out-dir", (dir.path / "bands").string()}).code == 0);
    std::size_t wavs = 0;
    for (const auto& e : fs::directory_iterator(dir.path / "bands")) wavs += e.path().extension() == ".wav";
    CHECK(wavs == 10);
    CHECK(fs::exists(dir.path / "bands" / "band_01_0-50.wav"));
    CHECK(fs::exists(dir.path / "bands" / "band_10_15000-22050.wav"));

    const std::string all = (dir.path / "rs" / "all.wav").string();
    REQUIRE(cli({"resynth", "--bands", (dir.path / "bands").string(), "--select", "1,2,3,4,5,6,7,8,9,10", "--out", all})
                .code == 0);
    const auto sum = sc::to_stereo(sc::read_wav(all));
    const auto in = sc::to_stereo(sc::read_wav(mix));
    REQUIRE(sum.frames() == in.frames());
    double peak = 0.0;
    for (std::size_t n = 0; n < in.frames(); ++n) {
      peak = std::max({peak, std::abs(sum.left[n] - in.left[n]), std::abs(sum.right[n] - in.right[n])});
    }
    CHECK(20.0 * std::log10(peak + 1e-300) < -100.0);
    CHECK(fs::exists(dir.path / "rs" / "run.json"));

    CHECK(cli({"resynth", "--bands", (dir.path / "bands").string(), "--select", "2,5", "--out", all}).code == 0);
    CHECK(cli({"resynth", "--bands", (dir.path / "bands").string(), "--select", "11", "--out", all}).code == 1);
  }

  SUBCASE("laws, hist, isd and carto outputs") {
    REQUIRE(cli({"laws", "--in", mix, "--out-dir", (dir.path / "laws").string(), "--smooth-hz", "2"}).code == 0);
    const auto law = ts::read_csv(dir.path / "laws" / "law_band_02.csv");
    CHECK(law.size() == 1 + 20);
    CHECK(law[0] == std::vector<std::string>{"time_s", "delta_t_ms", "delta_e_db", "corr", "valid"});

    REQUIRE(cli({"hist", "--in", mix, "--out-dir", (dir.path / "hist").string()}).code == 0);
    std::size_t csvs = 0;
    for (const auto& e : fs::directory_iterator(dir.path / "hist")) csvs += e.path().extension() == ".csv";
    CHECK(csvs == 22);
    REQUIRE(cli({"hist", "--in", mix, "--out-dir", (dir.path / "h3").string(), "--band", "3"}).code == 0);
    CHECK(fs::exists(dir.path / "h3" / "hist_delay_band_03.csv"));
    CHECK(fs::exists(dir.path / "h3" / "hist_attenuation_band_03.csv"));
    CHECK_FALSE(fs::exists(dir.path / "h3" / "hist_delay_global.csv"));

    REQUIRE(cli({"isd", "--in", mix, "--out", (dir.path / "isd" / "isd.csv").string()}).code == 0);
    CHECK(ts::read_csv(dir.path / "isd" / "isd.csv").size() == 11);

    const auto c = cli({"carto", "--in", mix, "--out", (dir.path / "carto" / "c.csv").string(), "--locate"});
    REQUIRE(c.code == 0);
    const auto rows = ts::read_csv(dir.path / "carto" / "c.csv");
    REQUIRE(rows.size() >= 2);
    CHECK(std::abs(std::stod(rows[1][0]) - 0.35) <= 0.01);
    CHECK(std::abs(std::stod(rows[1][5]) - 45.0) <= 1.0);
    CHECK(fs::exists(dir.path / "carto" / "run.json"));
  }
}

TEST_CASE("reruns are byte identical") {
  ts::TempDir dir("cli_det");
  const auto scene = write_scene(dir.path);
  for (const char* run : {"a", "b"}) {
    const fs::path d = dir.path / run;
    REQUIRE(cli({"simulate", "--scene", scene.string(), "--out", (d / "mix.wav").string(), "--bit-depth", "24"}).code == 0);
    REQUIRE(cli({"hist", "--in", (d / "mix.wav").string(), "--out-dir", (d / "hist").string(), "--global"}).code == 0);
  }
  for (const char* rel : {"mix.wav", "hist/hist_delay_global.csv", "hist/hist_attenuation_global.csv"}) {
    CAPTURE(rel);
    CHECK(ts::slurp(dir.path / "a" / rel) == ts::slurp(dir.path / "b" / rel));
  }
  // Manifests name their own outputs, so compare with the paths normalised.
  auto manifest = [&](const char* run, const char* rel) {
    auto text = ts::slurp(dir.path / run / rel);
    const std::string base = (dir.path / run).string();
    for (auto pos = text.find(base); pos != std::string::npos; pos = text.find(base)) text.replace(pos, base.size(), "@");
    return text;
  };
  CHECK(manifest("a", "run.json") == manifest("b", "run.json"));
  CHECK(manifest("a", "hist/run.json") == manifest("b", "hist/run.json"));
}

TEST_CASE("the installed binary runs") {
  ts::TempDir dir("cli_exe");
  const auto scene = write_scene(dir.path);
  const fs::path log = dir.path / "log.txt";
  CHECK(exe("--version", log) == 0);
  CHECK(ts::slurp(log).find(sc::tool_version()) != std::string::npos);
  CHECK(exe("", log) == 1);
  CHECK(exe("carto --in \"" + (dir.path / "none.wav").string() + "\" --out \"" + (dir.path / "c.csv").string() + "\"", log) == 2);
  CHECK(exe("simulate --scene \"" + scene.string() + "\" --out \"" + (dir.path / "mix.wav").string() + "\" --bit-depth 16",
            log) == 0);
  const auto w = sc::read_wav(dir.path / "mix.wav");
  CHECK(w.format == sc::SampleFormat::pcm16);
  CHECK(w.channels.size() == 2);
}
