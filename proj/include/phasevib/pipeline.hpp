#pragma once

// End-to-end workflow: load -> (enhance) -> estimate -> spectrum -> peaks ->
// per-peak magnify -> deflection shape, and the baseline-vs-test report.
// Also the CSV/JSON artifact writers shared by the command-line tool.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "phasevib/error.hpp"
#include "phasevib/gabor.hpp"
#include "phasevib/image_core.hpp"
#include "phasevib/io.hpp"
#include "phasevib/magnify.hpp"
#include "phasevib/modal.hpp"
#include "phasevib/pme.hpp"
#include "phasevib/serialize.hpp"
#include "phasevib/spectral.hpp"

namespace phasevib {

namespace fs = std::filesystem;

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Configuration

struct RoiConfig {
  std::vector<PixelPoint> points;  // empty: choose automatically
  std::size_t auto_count = 16;
  double auto_min_spacing_px = 0.0;  // 0: one wavelength
  int auto_border_px = -1;           // < 0: half a wavelength
};

struct EnhanceConfig {
  bool enabled = false;
  double low_quantile = 0.01;
  double high_quantile = 0.99;
};

struct BandConfig {
  BandpassSpec spec;
  bool auto_alpha = true;
};

struct PipelineConfig {
  std::string input;
  double fps = 0.0;
  GaborParams gabor;
  RoiConfig roi;
  double threshold_fraction = 0.1;
  EnhanceConfig enhance;
  PeakOptions peaks;
  std::vector<BandConfig> bands;     // optional per-mode overrides, matched by containment
  double band_width_hz = 3.0;        // for peaks without a configured band
  double target_magnified_px = 0.0;  // auto alpha target; 0: lambda / 10
  double max_alpha = 500.0;
  ShapeCalibration calibration;
  int shape_smoothing = 5;
  DamageThresholds thresholds;
  std::string out;

  double resolved_target_px() const { return target_magnified_px > 0.0 ? target_magnified_px : gabor.lambda / 10.0; }
  double resolved_spacing_px() const { return roi.auto_min_spacing_px > 0.0 ? roi.auto_min_spacing_px : gabor.lambda; }
  int resolved_border_px() const {
    return roi.auto_border_px >= 0 ? roi.auto_border_px : static_cast<int>(std::ceil(gabor.lambda / 2.0));
  }
};

inline void to_json(json& j, const PipelineConfig& c) {
  json bands = json::array();
  for (const auto& b : c.bands) {
    json e = b.spec;
    if (b.auto_alpha) e["alpha"] = nullptr;
    bands.push_back(e);
  }
  j = json{{"input", c.input},
           {"fps", c.fps},
           {"gabor", c.gabor},
           {"roi",
            {{"points", c.roi.points},
             {"auto_count", c.roi.auto_count},
             {"auto_min_spacing_px", c.resolved_spacing_px()},
             {"auto_border_px", c.resolved_border_px()}}},
           {"threshold_fraction", c.threshold_fraction},
           {"enhance",
            {{"enabled", c.enhance.enabled}, {"low_quantile", c.enhance.low_quantile}, {"high_quantile", c.enhance.high_quantile}}},
           {"peaks", c.peaks},
           {"bands", bands},
           {"band_width_hz", c.band_width_hz},
           {"target_magnified_px", c.resolved_target_px()},
           {"max_alpha", c.max_alpha},
           {"calibration",
            {{"length_m", c.calibration.structure_length_m},
             {"span_axis", c.calibration.span_axis == SpanAxis::x ? "x" : "y"}}},
           {"shape_smoothing", c.shape_smoothing},
           {"thresholds", c.thresholds},
           {"out", c.out}};
}

inline void from_json(const json& j, PipelineConfig& c) {
  read_json_opt(j, "input", c.input);
  read_json_opt(j, "fps", c.fps);
  if (j.contains("gabor")) j.at("gabor").get_to(c.gabor);
  if (j.contains("roi")) {
    const auto& r = j.at("roi");
    read_json_opt(r, "points", c.roi.points);
    read_json_opt(r, "auto_count", c.roi.auto_count);
    read_json_opt(r, "auto_min_spacing_px", c.roi.auto_min_spacing_px);
    read_json_opt(r, "auto_border_px", c.roi.auto_border_px);
  }
  read_json_opt(j, "threshold_fraction", c.threshold_fraction);
  if (j.contains("enhance")) {
    const auto& e = j.at("enhance");
    read_json_opt(e, "enabled", c.enhance.enabled);
    read_json_opt(e, "low_quantile", c.enhance.low_quantile);
    read_json_opt(e, "high_quantile", c.enhance.high_quantile);
  }
  if (j.contains("peaks")) j.at("peaks").get_to(c.peaks);
  read_json_opt(j, "band_width_hz", c.band_width_hz);
  if (j.contains("bands")) {
    c.bands.clear();
    for (const auto& b : j.at("bands")) {
      BandConfig bc;
      bc.spec.width_hz = c.band_width_hz;
      b.get_to(bc.spec);
      bc.auto_alpha = !b.contains("alpha") || b.at("alpha").is_null();
      c.bands.push_back(bc);
    }
  }
  read_json_opt(j, "target_magnified_px", c.target_magnified_px);
  read_json_opt(j, "max_alpha", c.max_alpha);
  if (j.contains("calibration")) {
    const auto& k = j.at("calibration");
    read_json_opt(k, "length_m", c.calibration.structure_length_m);
    if (k.contains("span_axis")) {
      const auto axis = k.at("span_axis").get<std::string>();
      if (axis != "x" && axis != "y") throw Error("calibration.span_axis must be \"x\" or \"y\"", "config");
      c.calibration.span_axis = axis == "x" ? SpanAxis::x : SpanAxis::y;
    }
  }
  read_json_opt(j, "shape_smoothing", c.shape_smoothing);
  if (j.contains("thresholds")) j.at("thresholds").get_to(c.thresholds);
  read_json_opt(j, "out", c.out);
}

inline json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string(), "config");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(path.filename().string() + ": invalid JSON (" + std::string(e.what()) + ")", "config");
  }
}

/// Relative input paths in a config file resolve against the file's directory.
inline PipelineConfig load_config(const fs::path& path) {
  PipelineConfig c;
  try {
    read_json_file(path).get_to(c);
  } catch (const json::exception& e) {
    throw Error(path.filename().string() + ": " + e.what(), "config");
  }
  if (!c.input.empty() && fs::path(c.input).is_relative()) c.input = (path.parent_path() / c.input).lexically_normal().string();
  return c;
}

inline void validate(const PipelineConfig& c, bool need_input = true) {
  if (need_input) {
    if (c.input.empty()) throw Error("no input given", "config");
    if (!fs::exists(c.input)) throw Error("input not found: " + c.input, "config");
  }
  if (!(c.fps > 0.0)) throw Error("frame rate (fps) must be positive", "config");
  c.gabor.validate();
  check_threshold_fraction(c.threshold_fraction);
  check_quantiles(c.enhance.low_quantile, c.enhance.high_quantile);
  for (const auto& b : c.bands) {
    BandpassSpec s = b.spec;
    if (b.auto_alpha) s.alpha = 1.0;
    s.validate(c.fps);
  }
  if (!(c.band_width_hz > 0.0)) throw Error("band width must be positive", "config");
  if (!(c.max_alpha >= 1.0)) throw Error("max_alpha must be >= 1", "config");
  if (!(c.calibration.structure_length_m > 0.0)) throw Error("structure length must be positive", "config");
  if (c.shape_smoothing < 1) throw Error("shape smoothing window must be >= 1", "config");
}

inline void write_json(const json& j, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path.filename().string() + ": cannot create", "write");
  out << j.dump(2) << '\n';
}

/// Exclusive claim on an output directory for the lifetime of the object.
class OutputLock {
 public:
  explicit OutputLock(const fs::path& dir) : path_(dir / ".phasevib.lock") {
    fs::create_directories(dir);
    std::FILE* f = std::fopen(path_.string().c_str(), "wx");
    if (!f) throw Error("output directory " + dir.string() + " is in use by another run (remove " + path_.string() +
                            " if stale)",
                        "lock");
    std::fclose(f);
  }
  ~OutputLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  fs::path path_;
};

// ---------------------------------------------------------------------------
// Artifacts

inline void write_motion_csv(const MotionSignal& s, const fs::path& path) {
  io::CsvTable t;
  t.header.push_back("time_s");
  std::vector<double> time(s.length());
  for (std::size_t k = 0; k < time.size(); ++k) time[k] = static_cast<double>(k) / s.frame_rate_hz;
  t.columns.push_back(time);
  for (std::size_t p = 0; p < s.point_count(); ++p) {
    t.header.push_back("point_" + std::to_string(p));
    t.columns.push_back(s.displacement[p]);
  }
  io::write_csv(t, path);
}

inline json motion_metadata(const MotionSignal& s) {
  std::vector<bool> rel(s.reliable.begin(), s.reliable.end());
  return json{{"frame_rate_hz", s.frame_rate_hz},
              {"gabor", s.params},
              {"threshold_fraction", s.threshold_fraction},
              {"roi", {{"points", s.points}, {"theta", s.params.theta}}},
              {"reliable", rel},
              {"median_amplitude", s.median_amplitude}};
}

/// Motion CSV plus its JSON sidecar (`<stem>.json`) when present.
inline MotionSignal read_motion(const fs::path& csv) {
  const auto t = io::read_csv(csv);
  if (t.header.empty() || t.header[0] != "time_s") throw Error(csv.filename().string() + ": missing time_s column", "load");
  if (t.rows() < 2) throw Error(csv.filename().string() + ": need >= 2 samples", "load");
  MotionSignal s;
  s.frame_rate_hz = 1.0 / (t.columns[0][1] - t.columns[0][0]);
  for (std::size_t j = 1; j < t.columns.size(); ++j) {
    s.displacement.push_back(t.columns[j]);
    s.points.push_back({});
    s.reliable.push_back(true);
    s.median_amplitude.push_back(0.0);
  }
  fs::path side = csv;
  side.replace_extension(".json");
  if (fs::exists(side)) {
    const json m = read_json_file(side);
    read_json_opt(m, "frame_rate_hz", s.frame_rate_hz);
    if (m.contains("gabor")) m.at("gabor").get_to(s.params);
    read_json_opt(m, "threshold_fraction", s.threshold_fraction);
    if (m.contains("roi")) read_json_opt(m.at("roi"), "points", s.points);
    if (m.contains("reliable")) {
      const auto rel = m.at("reliable").get<std::vector<bool>>();
      s.reliable.assign(rel.begin(), rel.end());
    }
    read_json_opt(m, "median_amplitude", s.median_amplitude);
    if (s.points.size() != s.displacement.size() || s.reliable.size() != s.displacement.size())
      throw Error(side.filename().string() + ": point count does not match " + csv.filename().string(), "load");
  }
  return s;
}

inline void write_spectrum_csv(const Spectrum& mean, const MotionSignal& s, const fs::path& path) {
  io::CsvTable t;
  t.header = {"frequency_hz", "magnitude"};
  t.columns = {mean.frequencies, mean.magnitudes};
  for (std::size_t p = 0; p < s.point_count(); ++p) {
    if (!s.reliable[p]) continue;
    t.header.push_back("point_" + std::to_string(p));
    t.columns.push_back(spectrum(s, p).magnitudes);
  }
  io::write_csv(t, path);
}

inline void write_shape_csv(const DeflectionShape& s, const fs::path& path) {
  io::write_csv({{"span_m", "displacement"}, {s.span_m, s.displacement}}, path);
}

inline DeflectionShape read_shape_csv(const fs::path& path) {
  const auto t = io::read_csv(path);
  DeflectionShape s;
  s.span_m = t.columns[io::column_index(t, "span_m")];
  s.displacement = t.columns[io::column_index(t, "displacement")];
  for (std::size_t i = 1; i < s.span_m.size(); ++i)
    if (!(s.span_m[i] > s.span_m[i - 1])) throw Error(path.filename().string() + ": span_m must increase", "load");
  return s;
}

inline void write_histogram_csv(const IntensityHistogram& h, const fs::path& path) {
  io::CsvTable t;
  t.header = {"bin_low", "bin_high", "count"};
  t.columns.assign(3, {});
  for (std::size_t b = 0; b < h.bins(); ++b) {
    t.columns[0].push_back(h.bin_edges[b]);
    t.columns[1].push_back(h.bin_edges[b + 1]);
    t.columns[2].push_back(static_cast<double>(h.counts[b]));
  }
  io::write_csv(t, path);
}

inline void write_kernel_csv(const GaborKernel& k, const fs::path& real_path, const fs::path& imag_path) {
  const int r = k.support_radius();
  std::ofstream re(real_path, std::ios::binary);
  std::ofstream im(imag_path, std::ios::binary);
  if (!re || !im) throw Error("cannot create kernel CSV", "write");
  for (int y = -r; y <= r; ++y) {
    for (int x = -r; x <= r; ++x) {
      re << (x > -r ? "," : "") << io::fmt(k.real(x, y));
      im << (x > -r ? "," : "") << io::fmt(k.imag(x, y));
    }
    re << '\n';
    im << '\n';
  }
}

inline std::string report_text(const DamageReport& r) {
  std::string s;
  char buf[160];
  s += std::string("verdict: ") + to_string(r.verdict) + "\n";
  std::snprintf(buf, sizeof buf, "freq_threshold_hz: %.4g\nmac_threshold: %.4g\n\n", r.thresholds.freq_threshold_hz,
                r.thresholds.mac_threshold);
  s += buf;
  std::snprintf(buf, sizeof buf, "%4s  %12s  %12s  %10s  %8s\n", "mode", "baseline_hz", "test_hz", "shift_hz", "mac");
  s += buf;
  for (std::size_t i = 0; i < r.baseline_hz.size(); ++i) {
    char mac[32];
    if (i < r.mac.size())
      std::snprintf(mac, sizeof mac, "%8.4f", r.mac[i]);
    else
      std::snprintf(mac, sizeof mac, "%8s", "-");
    std::snprintf(buf, sizeof buf, "%4zu  %12.4f  %12.4f  %+10.4f  %s\n", i + 1, r.baseline_hz[i], r.test_hz[i],
                  r.frequency_shift_hz[i], mac);
    s += buf;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Workflow

/// Largest |band component| of the displacement over reliable points.
inline double band_amplitude(const MotionSignal& s, double low_hz, double high_hz) {
  TemporalBandpass bp(s.length(), low_hz, high_hz, s.frame_rate_hz);
  std::vector<double> band(s.length());
  double peak = 0.0;
  for (std::size_t p = 0; p < s.point_count(); ++p) {
    if (!s.reliable[p]) continue;
    bp.band(s.displacement[p], band);
    for (double v : band) peak = std::max(peak, std::abs(v));
  }
  return peak;
}

/// Magnification that brings the band's peak motion to `target_px`.
inline double auto_alpha(const MotionSignal& s, double low_hz, double high_hz, double target_px, double max_alpha) {
  const double a = band_amplitude(s, low_hz, high_hz);
  if (!(a > 0.0)) return max_alpha;
  return std::clamp(target_px / a, 1.0, max_alpha);
}

inline RoiSpec resolve_roi(const VideoSequence& video, const PipelineConfig& c) {
  if (!c.roi.points.empty()) return RoiSpec{c.roi.points, c.gabor.theta};
  RoiSpec r = auto_roi(video, c.gabor, c.roi.auto_count, c.resolved_spacing_px(), c.resolved_border_px());
  if (r.points.empty()) throw Error("automatic ROI found no usable points", "estimate");
  return r;
}

struct ModeAnalysis {
  ModePeak peak;
  BandpassSpec band;
  ShapeExtraction extraction;
  double clamped_fraction = 0.0;
  std::vector<std::string> warnings;
};

struct Analysis {
  PipelineConfig config;
  RoiSpec roi;
  MotionSignal motion;
  Spectrum spectrum;
  std::vector<ModePeak> peaks;
  std::vector<ModeAnalysis> modes;
  std::optional<IntensityStretch> stretch;

  DamageFeatures features() const {
    DamageFeatures f{peaks, {}};
    for (const auto& m : modes) f.shapes.push_back(m.extraction.shape);
    return f;
  }
};

inline BandpassSpec band_for_peak(const PipelineConfig& c, const ModePeak& pk, const MotionSignal& motion) {
  for (const auto& b : c.bands) {
    if (std::abs(pk.frequency_hz - b.spec.center_hz) <= 0.5 * b.spec.width_hz) {
      BandpassSpec s = b.spec;
      if (b.auto_alpha) s.alpha = auto_alpha(motion, s.low_hz(), s.high_hz(), c.resolved_target_px(), c.max_alpha);
      return s;
    }
  }
  BandpassSpec s{pk.frequency_hz, c.band_width_hz, 1.0};
  const double nyq = 0.5 * c.fps;
  // Keep the band inside (0, Nyquist) for modes close to either end.
  s.width_hz = std::min(s.width_hz, 2.0 * std::min(pk.frequency_hz, nyq - pk.frequency_hz) * 0.999);
  s.alpha = auto_alpha(motion, s.low_hz(), s.high_hz(), c.resolved_target_px(), c.max_alpha);
  return s;
}

/// Runs the full single-input workflow on an in-memory video.
inline Analysis analyze(const VideoSequence& raw, const PipelineConfig& config, bool with_shapes = true) {
  Analysis a;
  a.config = config;
  const VideoSequence* video = &raw;
  std::optional<SequenceContrastResult> enhanced;
  if (config.enhance.enabled) {
    enhanced = enhance_sequence(raw, config.enhance.low_quantile, config.enhance.high_quantile);
    if (!enhanced->degenerate) {
      a.stretch = enhanced->stretch;
      video = &enhanced->video;
    }
  }
  a.roi = resolve_roi(*video, config);
  MotionOptions mo;
  mo.threshold_fraction = config.threshold_fraction;
  a.motion = estimate_motion(*video, config.gabor, a.roi, mo);
  a.spectrum = mean_spectrum(a.motion);
  a.peaks = pick_peaks(a.spectrum, config.peaks);
  if (!with_shapes) return a;
  for (const auto& pk : a.peaks) {
    ModeAnalysis m;
    m.peak = pk;
    m.band = band_for_peak(config, pk, a.motion);
    auto mag = magnify_video(*video, config.gabor, m.band);
    m.clamped_fraction = mag.clamped_fraction;
    m.warnings = mag.warnings;
    m.extraction = extract_shape(mag.video, config.calibration, config.shape_smoothing);
    m.extraction.shape.frequency_hz = pk.frequency_hz;
    a.modes.push_back(std::move(m));
  }
  return a;
}

inline Analysis analyze(const PipelineConfig& config, bool with_shapes = true) {
  validate(config);
  const auto video = io::load_sequence(config.input, config.fps);
  return analyze(video, config, with_shapes);
}

/// Writes every artifact of one analysis into `dir`.
inline void write_analysis(const Analysis& a, const fs::path& dir) {
  fs::create_directories(dir);
  write_json(a.config, dir / "config.json");
  write_motion_csv(a.motion, dir / "motion.csv");
  write_json(motion_metadata(a.motion), dir / "motion.json");
  write_spectrum_csv(a.spectrum, a.motion, dir / "spectrum.csv");
  json modes = json::array();
  for (std::size_t i = 0; i < a.modes.size(); ++i) {
    const auto& m = a.modes[i];
    const std::string name = "shape_mode_" + std::to_string(i + 1) + ".csv";
    write_shape_csv(m.extraction.shape, dir / name);
    modes.push_back({{"peak", m.peak},
                     {"band", m.band},
                     {"shape_csv", name},
                     {"frame_index", m.extraction.frame_index},
                     {"repaired_samples", m.extraction.repaired},
                     {"span_pixels", {m.extraction.span_index.front(), m.extraction.span_index.back()}},
                     {"clamped_fraction", m.clamped_fraction},
                     {"warnings", m.warnings}});
  }
  json meta{{"tool", "phasevib"},
            {"version", kVersion},
            {"spectrum", {{"window", "rectangular"}, {"resolution_hz", a.spectrum.resolution_hz}}},
            {"peaks", a.peaks},
            {"modes", modes}};
  if (a.stretch) meta["enhance_stretch"] = {{"low", a.stretch->low}, {"high", a.stretch->high}};
  write_json(meta, dir / "analysis.json");
}

struct ReportResult {
  DamageReport report;
  Analysis baseline;
  Analysis test;
};

/// Exit status for a report: 0 baseline-consistent, 2 damage-indicated.
inline int exit_code(const DamageReport& r) { return r.verdict == Verdict::damage_indicated ? 2 : 0; }

inline ReportResult run_report(const PipelineConfig& baseline, const PipelineConfig& test, const DamageThresholds& thr,
                               const fs::path& out) {
  OutputLock lock(out);
  ReportResult r{{}, analyze(baseline), {}};
  write_analysis(r.baseline, out / "baseline");
  r.test = analyze(test);
  write_analysis(r.test, out / "test");
  r.report = detect_damage(r.baseline.features(), r.test.features(), thr);
  json j = r.report;
  j["provenance"] = {{"tool", "phasevib"},
                     {"version", kVersion},
                     {"baseline", {{"input", baseline.input}, {"config", "baseline/config.json"}}},
                     {"test", {{"input", test.input}, {"config", "test/config.json"}}},
                     {"pairing", "ascending frequency order"}};
  write_json(j, out / "report.json");
  std::ofstream txt(out / "report.txt", std::ios::binary);
  txt << report_text(r.report);
  return r;
}

}  // namespace phasevib
