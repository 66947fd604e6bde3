#include "cli/commands.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <regex>

#include "stereocarto/csv_export.hpp"
#include "stereocarto/energy.hpp"
#include "stereocarto/error.hpp"
#include "stereocarto/manifest.hpp"
#include "stereocarto/pipeline.hpp"
#include "stereocarto/renderer.hpp"
#include "stereocarto/scene_config.hpp"
#include "stereocarto/wav.hpp"

namespace stereocarto::cli {
namespace fs = std::filesystem;

namespace {

struct AnalysisOptions {
  std::size_t taps = kDefaultTaps;
  double window_ms = 50.0;
  double hop_ms = 50.0;
  double max_lag_ms = 1.0;
  double min_rms_dbfs = -60.0;
  double min_corr = 0.5;
  double delay_bin_us = 10.0;
  double delay_range_ms = 1.5;
  double de_bin_db = 0.25;
  double de_range_db = 24.0;

  void add_to(CLI::App& cmd, bool histograms) {
    cmd.add_option("--taps", taps, "FIR length per band (odd)")->capture_default_str();
    cmd.add_option("--window-ms", window_ms, "Static-scene window length")->capture_default_str();
    cmd.add_option("--hop-ms", hop_ms, "Hop between windows")->capture_default_str();
    cmd.add_option("--max-lag-ms", max_lag_ms, "Largest correlation lag searched")->capture_default_str();
    cmd.add_option("--min-rms-dbfs", min_rms_dbfs, "Frames quieter than this are invalid")->capture_default_str();
    cmd.add_option("--min-corr", min_corr, "Frames with a lower correlation peak are invalid")->capture_default_str();
    if (histograms) {
      cmd.add_option("--delay-bin-us", delay_bin_us, "Delay histogram bin width")->capture_default_str();
      cmd.add_option("--delay-range-ms", delay_range_ms, "Delay histogram half range")->capture_default_str();
      cmd.add_option("--de-bin-db", de_bin_db, "Attenuation histogram bin width")->capture_default_str();
      cmd.add_option("--de-range-db", de_range_db, "Attenuation histogram half range")->capture_default_str();
    }
  }

  AnalysisConfig config() const {
    AnalysisConfig c;
    c.taps = taps;
    c.law.window_s = window_ms * 1e-3;
    c.law.hop_s = hop_ms * 1e-3;
    c.law.frame.max_lag_s = max_lag_ms * 1e-3;
    c.law.frame.min_rms_dbfs = min_rms_dbfs;
    c.law.frame.min_correlation = min_corr;
    c.histogram.delay_bin_s = delay_bin_us * 1e-6;
    c.histogram.delay_range_s = delay_range_ms * 1e-3;
    c.histogram.de_bin_db = de_bin_db;
    c.histogram.de_range_db = de_range_db;
    return c;
  }

  void record(RunManifest& m, bool histograms) const {
    m.config.emplace_back("taps", static_cast<long long>(taps));
    m.config.emplace_back("window_ms", window_ms);
    m.config.emplace_back("hop_ms", hop_ms);
    m.config.emplace_back("max_lag_ms", max_lag_ms);
    m.config.emplace_back("min_rms_dbfs", min_rms_dbfs);
    m.config.emplace_back("min_corr", min_corr);
    if (histograms) {
      m.config.emplace_back("delay_bin_us", delay_bin_us);
      m.config.emplace_back("delay_range_ms", delay_range_ms);
      m.config.emplace_back("de_bin_db", de_bin_db);
      m.config.emplace_back("de_range_db", de_range_db);
    }
  }
};

struct MicOptions {
  double spacing_m = 0.17;
  double axis_deg = 55.0;
  std::string directivity = "cardioid";
  double sound_speed = 343.0;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--spacing-m", spacing_m, "Capsule spacing used by --locate")->capture_default_str();
    cmd.add_option("--axis-deg", axis_deg, "Capsule axis half angle used by --locate")->capture_default_str();
    cmd.add_option("--directivity", directivity, "cardioid or omni")
        ->check(CLI::IsMember({"cardioid", "omni"}))
        ->capture_default_str();
    cmd.add_option("--sound-speed", sound_speed, "Speed of sound in m/s")->capture_default_str();
  }

  MicPair mic() const {
    return {spacing_m, axis_deg, directivity == "omni" ? Directivity::omni : Directivity::cardioid, sound_speed};
  }
};

StereoBuffer load_stereo(const fs::path& path, SampleFormat* format = nullptr) {
  WavData data = read_wav(path);
  if (format != nullptr) *format = data.format;
  return to_stereo(std::move(data));
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create directory " + dir.string() + ": " + ec.message());
}

fs::path output_dir(const fs::path& output) {
  const fs::path parent = output.parent_path();
  return parent.empty() ? fs::path(".") : parent;
}

void ensure_parent(const fs::path& output) { ensure_directory(output_dir(output)); }

fs::path manifest_beside(const fs::path& output) { return output_dir(output) / "run.json"; }

std::vector<int> parse_selection(const std::string& text) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("--select: \"" + item + "\" is not a band index");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

int cmd_simulate(const std::string& scene_path, const std::string& out_path, bool no_normalize, int bit_depth,
                 std::ostream& out, std::ostream& err) {
  const SceneLoadResult loaded = load_scene(scene_path);
  for (const Violation& v : loaded.diagnostics) {
    err << (v.severity == Violation::Severity::error ? "error: " : "warning: ") << scene_path << ": " << v.field
        << ": " << v.message << "\n";
  }
  if (!loaded.document) return kExitUsage;

  RenderConfig render = loaded.document->render;
  render.normalize = !no_normalize;
  const StereoBuffer mix = mix_scene(loaded.document->scene, render);
  const SampleFormat format = bit_depth == 16 ? SampleFormat::pcm16
                              : bit_depth == 24 ? SampleFormat::pcm24
                                                : SampleFormat::float32;
  ensure_parent(out_path);
  const WriteReport report = write_wav(out_path, mix, format);
  if (report.clipped_samples > 0) err << "warning: " << report.clipped_samples << " samples clipped\n";

  RunManifest m{"simulate", {scene_path}, {}, {out_path}};
  m.config.emplace_back("normalize", !no_normalize);
  m.config.emplace_back("bit_depth", static_cast<long long>(bit_depth));
  m.config.emplace_back("control_rate_hz", render.control_rate);
  m.config.emplace_back("interpolator_half_width", static_cast<long long>(render.interpolator_half_width));
  write_manifest(manifest_beside(out_path), m);
  out << "wrote " << out_path << " (" << mix.frames() << " frames)\n";
  return kExitOk;
}

int cmd_bands(const std::string& in_path, const std::string& out_dir, std::size_t taps, bool raw_delay,
              std::ostream& out) {
  SampleFormat format{};
  const StereoBuffer input = load_stereo(in_path, &format);
  const SubbandStereo sub = decompose(input, taps, !raw_delay);
  ensure_directory(out_dir);
  RunManifest m{"bands", {in_path}, {}, {}};
  m.config.emplace_back("taps", static_cast<long long>(taps));
  m.config.emplace_back("raw_delay", raw_delay);
  for (std::size_t k = 0; k < sub.bands.size(); ++k) {
    const std::string name = band_wav_name(sub.specs[k]);
    write_wav(fs::path(out_dir) / name, sub.bands[k], format);
    m.outputs.push_back(name);
  }
  write_manifest(fs::path(out_dir) / "run.json", m);
  out << "wrote " << sub.bands.size() << " bands to " << out_dir << "\n";
  return kExitOk;
}

int cmd_resynth(const std::string& bands_dir, const std::string& select, const std::string& out_path,
                std::ostream& out) {
  const std::vector<int> selection = parse_selection(select);
  if (selection.empty()) throw ConfigError("--select: empty band selection");

  static const std::regex pattern(R"(band_(\d\d)_.*\.wav)");
  std::map<int, fs::path> files;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(bands_dir, ec)) {
    std::smatch match;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, match, pattern)) files[std::stoi(match[1].str())] = entry.path();
  }
  if (ec) throw Error("cannot list " + bands_dir + ": " + ec.message());

  SubbandStereo sub;
  std::optional<SampleFormat> format;
  RunManifest m{"resynth", {}, {}, {out_path}};
  for (const auto& [index, path] : files) {
    SampleFormat f{};
    sub.bands.push_back(load_stereo(path, &f));
    sub.specs.push_back({index, 0.0, 0.0});
    if (!format) format = f;
  }
  // Band indices in files may skip numbers; map them onto positions.
  std::vector<int> positions;
  for (int wanted : selection) {
    auto it = std::find_if(sub.specs.begin(), sub.specs.end(), [&](const BandSpec& b) { return b.index == wanted; });
    if (it == sub.specs.end()) throw ConfigError(fmt::format("--select: no band {:02d} file in {}", wanted, bands_dir));
    positions.push_back(static_cast<int>(it - sub.specs.begin()) + 1);
    m.inputs.push_back(files[wanted].string());
  }
  const StereoBuffer mix = resynthesize(sub, positions);
  ensure_parent(out_path);
  write_wav(out_path, mix, format.value_or(SampleFormat::float32));
  m.config.emplace_back("select", select);
  write_manifest(manifest_beside(out_path), m);
  out << "wrote " << out_path << "\n";
  return kExitOk;
}

int cmd_isd(const std::string& in_path, const std::string& out_path, std::size_t taps, std::ostream& out) {
  const StereoBuffer input = load_stereo(in_path);
  const SubbandStereo sub = decompose(input, taps, true);
  ensure_parent(out_path);
  write_text(out_path, format_isd_csv(isd_profile(sub, input)));
  RunManifest m{"isd", {in_path}, {}, {out_path}};
  m.config.emplace_back("taps", static_cast<long long>(taps));
  write_manifest(manifest_beside(out_path), m);
  out << "wrote " << out_path << "\n";
  return kExitOk;
}

int cmd_laws(const std::string& in_path, const std::string& out_dir, const AnalysisOptions& opts,
             std::optional<double> smooth_hz, std::ostream& out) {
  const AnalysisConfig config = opts.config();
  const StereoBuffer input = load_stereo(in_path);
  const SubbandStereo sub = decompose(input, config.taps, true);
  auto laws = temporal_laws(sub, config.law);
  ensure_directory(out_dir);
  RunManifest m{"laws", {in_path}, {}, {}};
  opts.record(m, false);
  if (smooth_hz) m.config.emplace_back("smooth_hz", *smooth_hz);
  for (auto& law : laws) {
    if (smooth_hz) law = smooth_law(law, {*smooth_hz});
    const std::string name = law_csv_name(law.band);
    write_text(fs::path(out_dir) / name, format_law_csv(law));
    m.outputs.push_back(name);
  }
  write_manifest(fs::path(out_dir) / "run.json", m);
  out << "wrote " << laws.size() << " laws to " << out_dir << "\n";
  return kExitOk;
}

int cmd_hist(const std::string& in_path, const std::string& out_dir, const AnalysisOptions& opts,
             std::optional<int> band, bool global_only, std::ostream& out) {
  const AnalysisConfig config = opts.config();
  const StereoBuffer input = load_stereo(in_path);
  const SubbandStereo sub = decompose(input, config.taps, true);
  if (band && (*band < 1 || *band > static_cast<int>(sub.bands.size()))) {
    throw ConfigError(fmt::format("--band: {} is not a band index (1..{})", *band, sub.bands.size()));
  }
  const auto laws = temporal_laws(sub, config.law);

  std::vector<Histogram> selected;
  std::vector<Histogram> delays, levels;
  for (const auto& law : laws) {
    delays.push_back(histogram_1d(law, CueAxis::delay, config.histogram));
    levels.push_back(histogram_1d(law, CueAxis::attenuation, config.histogram));
  }
  if (band) {
    selected = {delays[static_cast<std::size_t>(*band - 1)], levels[static_cast<std::size_t>(*band - 1)]};
  } else {
    if (!global_only) {
      selected.insert(selected.end(), delays.begin(), delays.end());
      selected.insert(selected.end(), levels.begin(), levels.end());
    }
    selected.push_back(global_histogram(delays));
    selected.push_back(global_histogram(levels));
  }

  ensure_directory(out_dir);
  RunManifest m{"hist", {in_path}, {}, {}};
  opts.record(m, true);
  if (band) m.config.emplace_back("band", static_cast<long long>(*band));
  m.config.emplace_back("global_only", global_only);
  for (const Histogram& h : selected) {
    const std::string name = histogram_csv_name(h);
    write_text(fs::path(out_dir) / name, format_histogram_csv(h));
    m.outputs.push_back(name);
  }
  write_manifest(fs::path(out_dir) / "run.json", m);
  out << "wrote " << selected.size() << " histograms to " << out_dir << "\n";
  return kExitOk;
}

int cmd_carto(const std::string& in_path, const std::string& out_path, const AnalysisOptions& opts,
              const MicOptions& mic_opts, bool locate, std::ostream& out) {
  AnalysisConfig config = opts.config();
  config.candidates.locate = locate;
  const StereoBuffer input = load_stereo(in_path);
  const CartographyResult result = run_cartography(input, mic_opts.mic(), config);
  ensure_parent(out_path);
  write_text(out_path, format_candidates_csv(result.candidates));

  RunManifest m{"carto", {in_path}, {}, {out_path}};
  opts.record(m, true);
  m.config.emplace_back("locate", locate);
  if (locate) {
    m.config.emplace_back("spacing_m", mic_opts.spacing_m);
    m.config.emplace_back("axis_deg", mic_opts.axis_deg);
    m.config.emplace_back("directivity", mic_opts.directivity);
    m.config.emplace_back("sound_speed", mic_opts.sound_speed);
  }
  write_manifest(manifest_beside(out_path), m);
  out << "wrote " << result.candidates.size() << " candidates to " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stereo scene simulation and subband cartography"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);

  std::function<int()> action;

  // simulate
  std::string scene_path, out_path, in_path, out_dir, bands_dir, select;
  bool no_normalize = false, raw_delay = false, global_only = false, locate = false;
  int bit_depth = 32;
  std::size_t taps = kDefaultTaps;
  std::optional<int> band;
  std::optional<double> smooth_hz;
  AnalysisOptions laws_opts, hist_opts, carto_opts;
  MicOptions mic_opts;

  auto* simulate = app.add_subcommand("simulate", "Render a JSON scene to a stereo WAV");
  simulate->add_option("--scene", scene_path, "Scene document")->required();
  simulate->add_option("--out", out_path, "Output WAV")->required();
  simulate->add_flag("--no-normalize", no_normalize, "Skip joint peak normalization to -1 dBFS");
  simulate->add_option("--bit-depth", bit_depth, "16, 24 or 32 (float)")
      ->check(CLI::IsMember({16, 24, 32}))
      ->capture_default_str();
  simulate->callback([&] { action = [&] { return cmd_simulate(scene_path, out_path, no_normalize, bit_depth, out, err); }; });

  auto* bands = app.add_subcommand("bands", "Write the 10 Leipp subbands as stereo WAVs");
  bands->add_option("--in", in_path, "Stereo input WAV")->required();
  bands->add_option("--out-dir", out_dir, "Output directory")->required();
  bands->add_option("--taps", taps, "FIR length per band (odd)")->capture_default_str();
  bands->add_flag("--raw-delay", raw_delay, "Keep the filter group delay and full convolution tails");
  bands->callback([&] { action = [&] { return cmd_bands(in_path, out_dir, taps, raw_delay, out); }; });

  auto* resynth = app.add_subcommand("resynth", "Sum selected band WAVs");
  resynth->add_option("--bands", bands_dir, "Directory written by `bands`")->required();
  resynth->add_option("--select", select, "Comma-separated band indices, e.g. 1,2,5")->required();
  resynth->add_option("--out", out_path, "Output WAV")->required();
  resynth->callback([&] { action = [&] { return cmd_resynth(bands_dir, select, out_path, out); }; });

  auto* isd_cmd = app.add_subcommand("isd", "Per-band ISD ratio profile as CSV");
  isd_cmd->add_option("--in", in_path, "Stereo input WAV")->required();
  isd_cmd->add_option("--out", out_path, "Output CSV")->required();
  isd_cmd->add_option("--taps", taps, "FIR length per band (odd)")->capture_default_str();
  isd_cmd->callback([&] { action = [&] { return cmd_isd(in_path, out_path, taps, out); }; });

  auto* laws = app.add_subcommand("laws", "Per-band temporal laws of interchannel delay and attenuation");
  laws->add_option("--in", in_path, "Stereo input WAV")->required();
  laws->add_option("--out-dir", out_dir, "Output directory")->required();
  laws->add_option("--smooth-hz", smooth_hz, "Smooth valid runs with this cutoff before writing");
  laws_opts.add_to(*laws, false);
  laws->callback([&] { action = [&] { return cmd_laws(in_path, out_dir, laws_opts, smooth_hz, out); }; });

  auto* hist = app.add_subcommand("hist", "Delay and attenuation histograms");
  hist->add_option("--in", in_path, "Stereo input WAV")->required();
  hist->add_option("--out-dir", out_dir, "Output directory")->required();
  auto* band_opt = hist->add_option("--band", band, "Only this band (1..10)");
  hist->add_flag("--global", global_only, "Only the global (summed) histograms")->excludes(band_opt);
  hist_opts.add_to(*hist, true);
  hist->callback([&] { action = [&] { return cmd_hist(in_path, out_dir, hist_opts, band, global_only, out); }; });

  auto* carto = app.add_subcommand("carto", "Full pipeline: bands, laws, histograms, source candidates");
  carto->add_option("--in", in_path, "Stereo input WAV")->required();
  carto->add_option("--out", out_path, "Candidates CSV")->required();
  carto->add_flag("--locate", locate, "Invert each candidate to (distance, azimuth)");
  carto_opts.add_to(*carto, true);
  mic_opts.add_to(*carto);
  carto->callback([&] { action = [&] { return cmd_carto(in_path, out_path, carto_opts, mic_opts, locate, out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    return action ? action() : kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitProcessing;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.emplace_back("stereocarto");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace stereocarto::cli
