// phasevib: command-line front end.
//
// Every subcommand writes its artifacts plus a resolved config.json into --out.
// Failures print one line "phasevib: error: <stage>: <message>" to stderr and
// exit 1. `report` exits 0 (baseline-consistent) or 2 (damage-indicated).

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "phasevib/pipeline.hpp"
#include "phasevib/synth.hpp"

namespace pv = phasevib;
namespace fs = std::filesystem;
using pv::json;

namespace {

struct VideoFlags {
  std::string input;
  double fps = 0.0;
  double lambda = 0.0;
  double theta = 0.0;
  double sigma = 0.0;
  double gamma = 0.0;
  std::string out;
  std::string config;
  CLI::Option* o_fps = nullptr;
  CLI::Option* o_lambda = nullptr;
  CLI::Option* o_theta = nullptr;
  CLI::Option* o_sigma = nullptr;
  CLI::Option* o_gamma = nullptr;
  CLI::Option* o_input = nullptr;
  CLI::Option* o_out = nullptr;

  void add(CLI::App* app, bool gabor = true) {
    o_input = app->add_option("--input", input, "Input frame directory");
    o_fps = app->add_option("--fps", fps, "Frame rate in Hz");
    if (gabor) {
      o_lambda = app->add_option("--lambda", lambda, "Gabor wavelength in pixels");
      o_theta = app->add_option("--theta", theta, "Gabor orientation in radians (motion direction)");
      o_sigma = app->add_option("--sigma", sigma, "Gabor envelope std in pixels (default lambda/2)");
      o_gamma = app->add_option("--gamma", gamma, "Gabor aspect ratio");
    }
    o_out = app->add_option("--out", out, "Output directory");
    app->add_option("--config", config, "JSON config file; flags override its values");
  }

  /// Config file (if any) with flags applied on top.
  pv::PipelineConfig resolve() const {
    pv::PipelineConfig c = config.empty() ? pv::PipelineConfig{} : pv::load_config(config);
    if (o_input->count()) c.input = input;
    if (o_fps->count()) c.fps = fps;
    if (o_lambda && o_lambda->count()) {
      c.gabor.lambda = lambda;
      if (!o_sigma->count()) c.gabor.sigma = lambda / 2.0;
    }
    if (o_theta && o_theta->count()) c.gabor.theta = theta;
    if (o_sigma && o_sigma->count()) c.gabor.sigma = sigma;
    if (o_gamma && o_gamma->count()) c.gabor.gamma = gamma;
    if (o_out->count()) c.out = out;
    if (c.out.empty()) throw pv::Error("no output directory given (--out)", "config");
    return c;
  }
};

/// "x,y;x,y;..." or "auto" or "auto:N".
void apply_roi(const std::string& text, pv::PipelineConfig& c) {
  if (text.empty()) return;
  if (text.rfind("auto", 0) == 0) {
    c.roi.points.clear();
    if (text.size() > 5 && text[4] == ':') c.roi.auto_count = std::stoul(text.substr(5));
    return;
  }
  c.roi.points.clear();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.empty()) continue;
    const auto comma = item.find(',');
    if (comma == std::string::npos) throw pv::Error("--roi expects x,y;x,y;... (got '" + item + "')", "config");
    try {
      c.roi.points.push_back({std::stoi(item.substr(0, comma)), std::stoi(item.substr(comma + 1))});
    } catch (const std::exception&) {
      throw pv::Error("--roi expects integer pixel coordinates (got '" + item + "')", "config");
    }
  }
  if (c.roi.points.empty()) throw pv::Error("--roi has no points", "config");
}

void echo_config(const json& j, const fs::path& dir) { pv::write_json(j, dir / "config.json"); }

json command_config(const char* command, const pv::PipelineConfig& c) {
  json j = c;
  j["command"] = command;
  j["version"] = pv::kVersion;
  return j;
}

// ---------------------------------------------------------------------------

int cmd_synth(const std::string& kind, const std::string& out, const std::string& config, const std::optional<int>& frames,
              const std::optional<double>& fps, const std::optional<double>& tip_mass, const std::optional<double>& noise,
              const std::optional<std::uint64_t>& seed) {
  if (out.empty()) throw pv::Error("no output directory given (--out)", "config");
  const json file = config.empty() ? json::object() : pv::read_json_file(config);
  pv::OutputLock lock(out);
  json truth;
  pv::VideoSequence video;
  if (kind == "gaussian") {
    pv::synth::GaussianSurfaceConfig c;
    file.get_to(c);
    if (frames) c.frame_count = *frames;
    if (fps) c.frame_rate_hz = *fps;
    if (noise) c.noise_std = *noise;
    if (seed) c.seed = *seed;
    if (tip_mass) throw pv::Error("--tip-mass applies to the beam scene only", "config");
    auto g = pv::synth::gaussian_surface_video(c);
    std::vector<double> time(g.displacement_px.size());
    for (std::size_t k = 0; k < time.size(); ++k) time[k] = static_cast<double>(k) / c.frame_rate_hz;
    truth = {{"kind", "gaussian_surface"},
             {"config", c},
             {"frequency_hz", c.natural_frequency_rad_s / (2.0 * std::numbers::pi)},
             {"time_s", time},
             {"displacement_x_px", g.displacement_px}};
    video = std::move(g.video);
  } else if (kind == "beam") {
    pv::synth::BeamSceneConfig c;
    file.get_to(c);
    if (frames) c.frame_count = *frames;
    if (fps) c.frame_rate_hz = *fps;
    if (noise) c.noise_std = *noise;
    if (seed) c.seed = *seed;
    if (tip_mass) c.tip_mass_fraction = *tip_mass;
    auto b = pv::synth::cantilever_beam_video(c);
    std::vector<double> time(b.truth.tip_displacement_px.size());
    for (std::size_t k = 0; k < time.size(); ++k) time[k] = static_cast<double>(k) / c.frame_rate_hz;
    json shapes = json::array();
    for (std::size_t m = 0; m < b.truth.shapes.size(); ++m)
      shapes.push_back({{"mode", b.truth.mode_index[m]}, {"frequency_hz", b.truth.frequencies_hz[m]}, {"displacement", b.truth.shapes[m]}});
    truth = {{"kind", "cantilever_beam"},
             {"config", c},
             {"frequencies_hz", b.truth.frequencies_hz},
             {"span_m", b.truth.span_m},
             {"shapes", shapes},
             {"time_s", time},
             {"tip_displacement_px", b.truth.tip_displacement_px}};
    video = std::move(b.video);
  } else {
    throw pv::Error("unknown synth kind '" + kind + "' (expected gaussian or beam)", "config");
  }
  pv::io::write_sequence(video, out);
  pv::write_json(truth, fs::path(out) / "ground_truth.json");
  std::printf("synth %s: %zu frames %dx%d at %g fps -> %s\n", kind.c_str(), video.frame_count(), video.width(),
              video.height(), video.frame_rate_hz(), out.c_str());
  return 0;
}

int cmd_enhance(const VideoFlags& vf, double low, double high, int bins) {
  auto c = vf.resolve();
  c.enhance.enabled = true;
  c.enhance.low_quantile = low;
  c.enhance.high_quantile = high;
  pv::validate(c);
  pv::OutputLock lock(c.out);
  auto loaded = pv::io::load_sequence_named(c.input, c.fps);
  const auto r = pv::enhance_sequence(loaded.video, low, high);
  const fs::path out = c.out;
  pv::io::write_sequence(r.video, out, loaded.names, "_enh");
  pv::write_histogram_csv(pv::histogram(loaded.video[0], bins), out / "histogram.csv");
  pv::write_histogram_csv(pv::histogram(r.video[0], bins), out / "histogram_enh.csv");
  json meta{{"low_quantile", low},
            {"high_quantile", high},
            {"stretch", {{"low", r.stretch.low}, {"high", r.stretch.high}}},
            {"degenerate", r.degenerate}};
  pv::write_json(meta, out / "enhance.json");
  echo_config(command_config("enhance", c), out);
  if (r.degenerate) std::fprintf(stderr, "phasevib: warning: degenerate intensity range; frames written unchanged\n");
  std::printf("enhance: stretch [%g, %g] -> [0, 1], %zu frames\n", r.stretch.low, r.stretch.high, r.video.frame_count());
  return 0;
}

int cmd_estimate(const VideoFlags& vf, const std::string& roi, const std::optional<double>& threshold) {
  auto c = vf.resolve();
  apply_roi(roi, c);
  if (threshold) c.threshold_fraction = *threshold;
  pv::validate(c);
  pv::OutputLock lock(c.out);
  const auto video = pv::io::load_sequence(c.input, c.fps);
  const auto r = pv::resolve_roi(video, c);
  pv::MotionOptions mo;
  mo.threshold_fraction = c.threshold_fraction;
  const auto s = pv::estimate_motion(video, c.gabor, r, mo);
  const fs::path out = c.out;
  pv::write_motion_csv(s, out / "motion.csv");
  pv::write_json(pv::motion_metadata(s), out / "motion.json");
  c.roi.points = r.points;
  echo_config(command_config("estimate", c), out);
  std::printf("estimate: %zu points (%zu reliable), %zu frames\n", s.point_count(), s.reliable_count(), s.length());
  return 0;
}

int cmd_spectrum(const std::string& input, const std::string& out, const pv::PeakOptions& peaks) {
  if (out.empty()) throw pv::Error("no output directory given (--out)", "config");
  pv::OutputLock lock(out);
  const auto s = pv::read_motion(input);
  const auto spec = pv::mean_spectrum(s);
  const auto found = pv::pick_peaks(spec, peaks);
  pv::write_spectrum_csv(spec, s, fs::path(out) / "spectrum.csv");
  pv::write_json({{"window", "rectangular"}, {"resolution_hz", spec.resolution_hz}, {"peaks", found}},
                 fs::path(out) / "peaks.json");
  echo_config({{"command", "spectrum"}, {"version", pv::kVersion}, {"input", input}, {"peaks", peaks}, {"out", out}}, out);
  std::printf("spectrum: df = %g Hz, %zu peaks:", spec.resolution_hz, found.size());
  for (const auto& p : found) std::printf(" %.3f", p.frequency_hz);
  std::printf(" Hz\n");
  return 0;
}

int cmd_magnify(const VideoFlags& vf, const pv::BandpassSpec& spec) {
  auto c = vf.resolve();
  c.bands = {pv::BandConfig{spec, false}};
  pv::validate(c);
  spec.validate(c.fps);
  std::printf("magnify: fc=%g Hz b=%g Hz alpha=%g lambda=%g theta=%g\n", spec.center_hz, spec.width_hz, spec.alpha,
              c.gabor.lambda, c.gabor.theta);
  pv::OutputLock lock(c.out);
  auto loaded = pv::io::load_sequence_named(c.input, c.fps);
  const auto r = pv::magnify_video(loaded.video, c.gabor, spec);
  const fs::path out = c.out;
  pv::io::write_sequence(r.video, out, loaded.names);
  pv::write_json({{"spec", spec},
                  {"gabor", c.gabor},
                  {"reconstruction", "regularized inverse of the Gabor transform applied to the coefficient change"},
                  {"clamped_fraction", r.clamped_fraction},
                  {"warnings", r.warnings}},
                 out / "magnify.json");
  echo_config(command_config("magnify", c), out);
  for (const auto& w : r.warnings) std::fprintf(stderr, "phasevib: warning: %s\n", w.c_str());
  return 0;
}

int cmd_gain(const std::string& before, const std::string& after, const pv::BandpassSpec& spec, const std::string& out) {
  if (out.empty()) throw pv::Error("no output directory given (--out)", "config");
  pv::OutputLock lock(out);
  const auto b = pv::read_motion(before);
  const auto a = pv::read_motion(after);
  const auto r = pv::band_gain_report(b, a, spec);
  pv::write_json(r, fs::path(out) / "gain.json");
  pv::io::CsvTable t{{"frequency_hz", "gain"}, {{spec.center_hz}, {r.in_band_gain}}};
  for (const auto& p : r.out_of_band_peaks) {
    t.columns[0].push_back(p.frequency_hz);
    t.columns[1].push_back(p.gain);
  }
  pv::io::write_csv(t, fs::path(out) / "gain.csv");
  echo_config({{"command", "gain"}, {"version", pv::kVersion}, {"before", before}, {"after", after}, {"spec", spec}, {"out", out}},
              out);
  std::printf("gain: in-band %.4f (alpha %g), out-of-band %.4f\n", r.in_band_gain, spec.alpha, r.out_of_band_gain);
  return 0;
}

int cmd_ods(const VideoFlags& vf, const std::optional<double>& length_m, const std::string& axis, int smoothing) {
  auto c = vf.resolve();
  if (length_m) c.calibration.structure_length_m = *length_m;
  if (!axis.empty()) {
    if (axis != "x" && axis != "y") throw pv::Error("--axis must be x or y", "config");
    c.calibration.span_axis = axis == "x" ? pv::SpanAxis::x : pv::SpanAxis::y;
  }
  c.shape_smoothing = smoothing;
  pv::validate(c);
  pv::OutputLock lock(c.out);
  const auto video = pv::io::load_sequence(c.input, c.fps);
  const auto ex = pv::extract_shape(video, c.calibration, smoothing);
  const fs::path out = c.out;
  pv::write_shape_csv(ex.shape, out / "shape.csv");
  pv::io::write_csv({{"span_index", "rest_edge_px", "deflection_px"},
                     {std::vector<double>(ex.span_index.begin(), ex.span_index.end()), ex.rest_edge_px, ex.deflection_px}},
                    out / "edge.csv");
  pv::write_json({{"frame_index", ex.frame_index},
                  {"repaired_samples", ex.repaired},
                  {"span_pixels", {ex.span_index.front(), ex.span_index.back()}},
                  {"length_m", c.calibration.structure_length_m},
                  {"interior_nodes", pv::count_nodes(ex.shape.displacement)}},
                 out / "ods.json");
  echo_config(command_config("ods", c), out);
  std::printf("ods: %zu samples over %g m, frame %zu, %zu repaired\n", ex.shape.sample_count(),
              c.calibration.structure_length_m, ex.frame_index, ex.repaired);
  return 0;
}

int cmd_mac(const std::vector<std::string>& files, const std::string& out) {
  if (files.size() != 2) throw pv::Error("mac needs exactly two shape CSV files", "config");
  const auto a = pv::read_shape_csv(files[0]);
  const auto b = pv::read_shape_csv(files[1]);
  const double m = pv::mac(a, b);
  if (!out.empty()) {
    pv::OutputLock lock(out);
    pv::write_json({{"a", files[0]}, {"b", files[1]}, {"mac", m}}, fs::path(out) / "mac.json");
    echo_config({{"command", "mac"}, {"version", pv::kVersion}, {"a", files[0]}, {"b", files[1]}, {"out", out}}, out);
  }
  std::printf("mac: %.6f\n", m);
  return 0;
}

int cmd_report(const std::string& config, const std::string& baseline, const std::string& test, std::string out,
               const std::optional<double>& freq_thr, const std::optional<double>& mac_thr) {
  pv::DamageThresholds thr;
  fs::path base_cfg = baseline;
  fs::path test_cfg = test;
  if (!config.empty()) {
    const fs::path cfg = config;
    const json j = pv::read_json_file(cfg);
    if (j.contains("thresholds")) j.at("thresholds").get_to(thr);
    if (base_cfg.empty() && j.contains("baseline")) base_cfg = cfg.parent_path() / j.at("baseline").get<std::string>();
    if (test_cfg.empty() && j.contains("test")) test_cfg = cfg.parent_path() / j.at("test").get<std::string>();
    if (out.empty() && j.contains("out")) out = j.at("out").get<std::string>();
  }
  if (freq_thr) thr.freq_threshold_hz = *freq_thr;
  if (mac_thr) thr.mac_threshold = *mac_thr;
  if (base_cfg.empty() || test_cfg.empty()) throw pv::Error("report needs --baseline and --test configs", "config");
  if (out.empty()) throw pv::Error("no output directory given (--out)", "config");
  if (!(thr.freq_threshold_hz >= 0.0) || !(thr.mac_threshold >= 0.0 && thr.mac_threshold <= 1.0))
    throw pv::Error("thresholds must satisfy freq >= 0 and 0 <= mac <= 1", "config");
  const auto b = pv::load_config(base_cfg);
  const auto t = pv::load_config(test_cfg);
  pv::validate(b);
  pv::validate(t);
  const auto r = pv::run_report(b, t, thr, out);
  pv::write_json({{"command", "report"},
                  {"version", pv::kVersion},
                  {"baseline", base_cfg.string()},
                  {"test", test_cfg.string()},
                  {"thresholds", thr},
                  {"out", out}},
                 fs::path(out) / "config.json");
  std::fputs(pv::report_text(r.report).c_str(), stdout);
  return pv::exit_code(r.report);
}

int cmd_kernel(const VideoFlags& vf, double truncation) {
  auto c = vf.resolve();
  c.gabor.validate();
  pv::OutputLock lock(c.out);
  const auto k = pv::make_kernel(c.gabor, truncation);
  const fs::path out = c.out;
  pv::write_kernel_csv(k, out / "kernel_real.csv", out / "kernel_imag.csv");
  pv::write_json({{"gabor", c.gabor}, {"truncation_sigmas", truncation}, {"support_radius", k.support_radius()}},
                 out / "kernel.json");
  std::printf("kernel: %dx%d\n", k.side(), k.side());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-based vibration analysis: motion estimation, magnification and deflection shapes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", pv::kVersion);

  // synth
  auto* synth = app.add_subcommand("synth", "Render a synthetic test video with ground truth");
  std::string synth_kind;
  std::string synth_out;
  std::string synth_config;
  std::optional<int> synth_frames;
  std::optional<double> synth_fps;
  std::optional<double> synth_tip;
  std::optional<double> synth_noise;
  std::optional<std::uint64_t> synth_seed;
  synth->add_option("kind", synth_kind, "gaussian | beam")->required();
  synth->add_option("--out", synth_out, "Output frame directory");
  synth->add_option("--config", synth_config, "JSON scene config");
  synth->add_option("--frames", synth_frames, "Frame count");
  synth->add_option("--fps", synth_fps, "Frame rate in Hz");
  synth->add_option("--tip-mass", synth_tip, "Tip mass as a fraction of beam mass (beam only)");
  synth->add_option("--noise", synth_noise, "Pixel noise std");
  synth->add_option("--seed", synth_seed, "Noise seed");

  // enhance
  auto* enhance = app.add_subcommand("enhance", "Stretch the intensity range of a frame directory");
  VideoFlags enh_vf;
  enh_vf.add(enhance, false);
  double enh_low = 0.01;
  double enh_high = 0.99;
  int enh_bins = 256;
  enhance->add_option("--low-quantile", enh_low, "Quantile mapped to 0");
  enhance->add_option("--high-quantile", enh_high, "Quantile mapped to 1");
  enhance->add_option("--bins", enh_bins, "Histogram bins");

  // estimate
  auto* estimate = app.add_subcommand("estimate", "Phase-based motion estimation at ROI points");
  VideoFlags est_vf;
  est_vf.add(estimate);
  std::string est_roi;
  std::optional<double> est_thr;
  estimate->add_option("--roi", est_roi, "Points 'x,y;x,y;...' or 'auto[:N]'");
  estimate->add_option("--threshold", est_thr, "Reliability threshold fraction");

  // spectrum
  auto* spectrum = app.add_subcommand("spectrum", "Amplitude spectrum and peak picking of a motion CSV");
  std::string spec_in;
  std::string spec_out;
  pv::PeakOptions spec_peaks;
  spectrum->add_option("--input", spec_in, "motion.csv from estimate")->required();
  spectrum->add_option("--out", spec_out, "Output directory");
  spectrum->add_option("--prominence", spec_peaks.min_prominence_fraction, "Minimum prominence, fraction of the maximum");
  spectrum->add_option("--separation", spec_peaks.min_separation_hz, "Minimum peak separation in Hz");
  spectrum->add_option("--max-peaks", spec_peaks.max_peaks, "Maximum number of peaks");

  // magnify
  auto* magnify = app.add_subcommand("magnify", "Magnify motion in one temporal band");
  VideoFlags mag_vf;
  mag_vf.add(magnify);
  pv::BandpassSpec mag_spec;
  magnify->add_option("--fc", mag_spec.center_hz, "Band centre in Hz")->required();
  magnify->add_option("--b", mag_spec.width_hz, "Band width in Hz");
  magnify->add_option("--alpha", mag_spec.alpha, "In-band magnification factor");

  // gain
  auto* gain = app.add_subcommand("gain", "In-band and out-of-band gain between two motion CSVs");
  std::string gain_before;
  std::string gain_after;
  std::string gain_out;
  pv::BandpassSpec gain_spec;
  gain->add_option("--before", gain_before, "motion.csv of the original video")->required();
  gain->add_option("--after", gain_after, "motion.csv of the magnified video")->required();
  gain->add_option("--fc", gain_spec.center_hz, "Band centre in Hz")->required();
  gain->add_option("--b", gain_spec.width_hz, "Band width in Hz");
  gain->add_option("--alpha", gain_spec.alpha, "Magnification factor used");
  gain->add_option("--out", gain_out, "Output directory");

  // ods
  auto* ods = app.add_subcommand("ods", "Operating deflection shape from a magnified video");
  VideoFlags ods_vf;
  ods_vf.add(ods, false);
  std::optional<double> ods_len;
  std::string ods_axis;
  int ods_smooth = 5;
  ods->add_option("--length-m", ods_len, "Structure length in metres");
  ods->add_option("--axis", ods_axis, "Span axis: x or y");
  ods->add_option("--smoothing", ods_smooth, "Gradient smoothing window in pixels");

  // mac
  auto* macc = app.add_subcommand("mac", "Modal Assurance Criterion of two shape CSVs");
  std::vector<std::string> mac_files;
  std::string mac_out;
  macc->add_option("shapes", mac_files, "Two shape.csv files")->required()->expected(2);
  macc->add_option("--out", mac_out, "Output directory");

  // report
  auto* report = app.add_subcommand("report", "Baseline-vs-test damage report (exit 0 consistent, 2 damage)");
  std::string rep_cfg;
  std::string rep_base;
  std::string rep_test;
  std::string rep_out;
  std::optional<double> rep_freq;
  std::optional<double> rep_mac;
  report->add_option("--config", rep_cfg, "JSON with baseline, test, thresholds, out");
  report->add_option("--baseline", rep_base, "Baseline pipeline config");
  report->add_option("--test", rep_test, "Test pipeline config");
  report->add_option("--out", rep_out, "Output directory");
  report->add_option("--freq-threshold", rep_freq, "Frequency-shift threshold in Hz (default 0.6)");
  report->add_option("--mac-threshold", rep_mac, "MAC threshold (default 0.85)");

  // kernel
  auto* kernel = app.add_subcommand("kernel", "Dump the Gabor kernel as CSV");
  VideoFlags ker_vf;
  ker_vf.add(kernel);
  double ker_trunc = 3.0;
  kernel->add_option("--truncation", ker_trunc, "Support radius in envelope sigmas");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "phasevib: error: cli: %s\n", e.what());
    return 1;
  }

  try {
    if (*synth) return cmd_synth(synth_kind, synth_out, synth_config, synth_frames, synth_fps, synth_tip, synth_noise, synth_seed);
    if (*enhance) return cmd_enhance(enh_vf, enh_low, enh_high, enh_bins);
    if (*estimate) return cmd_estimate(est_vf, est_roi, est_thr);
    if (*spectrum) return cmd_spectrum(spec_in, spec_out, spec_peaks);
    if (*magnify) return cmd_magnify(mag_vf, mag_spec);
    if (*gain) return cmd_gain(gain_before, gain_after, gain_spec, gain_out);
    if (*ods) return cmd_ods(ods_vf, ods_len, ods_axis, ods_smooth);
    if (*macc) return cmd_mac(mac_files, mac_out);
    if (*report) return cmd_report(rep_cfg, rep_base, rep_test, rep_out, rep_freq, rep_mac);
    if (*kernel) return cmd_kernel(ker_vf, ker_trunc);
  } catch (const pv::Error& e) {
    std::string msg = e.what();
    for (char& ch : msg)
      if (ch == '\n') ch = ' ';
    std::fprintf(stderr, "phasevib: error: %s: %s\n", e.stage().c_str(), msg.c_str());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "phasevib: error: internal: %s\n", e.what());
    return 1;
  }
  return 1;
}
