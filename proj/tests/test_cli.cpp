#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "phasevib/pipeline.hpp"
#include "support.hpp"

using namespace phasevib;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run cli(const std::string& args, const fs::path& scratch) {
  const auto o = scratch / "stdout.txt";
  const auto e = scratch / "stderr.txt";
  const std::string cmd = std::string(PHASEVIB_CLI) + " " + args + " > '" + o.string() + "' 2> '" + e.string() + "'";
  const int raw = std::system(cmd.c_str());
  Run r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(o);
  r.err = slurp(e);
  return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

void write_static_frames(const fs::path& dir, int n) {
  const auto f = testing_support::Texture::band_limited(8, 3).render(48, 48, 0, 0);
  io::write_sequence(VideoSequence(std::vector<Frame>(n, f), 100.0), dir);
}

}  // namespace

TEST(Cli, StaticEstimateWritesZeroMotion) {
  const auto d = testing_support::temp_dir("cli_static");
  write_static_frames(d / "frames", 12);
  const auto r = cli("estimate --input " + q(d / "frames") + " --fps 100 --lambda 8 --roi '20,20;28,24' --out " + q(d / "out"), d);
  ASSERT_EQ(r.status, 0) << r.err;
  const auto s = read_motion(d / "out" / "motion.csv");
  ASSERT_EQ(s.point_count(), 2u);
  ASSERT_EQ(s.length(), 12u);
  for (const auto& series : s.displacement)
    for (double v : series) EXPECT_EQ(v, 0.0);
  const auto cfg = read_json_file(d / "out" / "config.json");
  EXPECT_EQ(cfg["command"], "estimate");
  EXPECT_DOUBLE_EQ(cfg["gabor"]["sigma"].get<double>(), 4.0);
  EXPECT_DOUBLE_EQ(cfg["threshold_fraction"].get<double>(), 0.1);
}

TEST(Cli, EstimateIsReproducible) {
  const auto d = testing_support::temp_dir("cli_repro");
  const auto t = testing_support::Texture::band_limited(8, 5);
  std::vector<Frame> frames;
  for (int k = 0; k < 16; ++k) frames.push_back(t.render(48, 48, 0.3 * std::sin(k * 0.7), 0));
  io::write_sequence(VideoSequence(frames, 100.0), d / "frames");
  const std::string base = "estimate --input " + q(d / "frames") + " --fps 100 --lambda 8 --roi '20,20;28,24' --out ";
  ASSERT_EQ(cli(base + q(d / "a"), d).status, 0);
  ASSERT_EQ(cli(base + q(d / "b"), d).status, 0);
  EXPECT_EQ(slurp(d / "a" / "motion.csv"), slurp(d / "b" / "motion.csv"));
  EXPECT_FALSE(slurp(d / "a" / "motion.csv").empty());
}

TEST(Cli, MagnifyEchoesBandAndAlpha) {
  const auto d = testing_support::temp_dir("cli_mag_echo");
  write_static_frames(d / "frames", 16);
  const auto r = cli("magnify --input " + q(d / "frames") + " --fps 100 --lambda 8 --fc 5.85 --b 3 --alpha 25 --out " +
                         q(d / "out"),
                     d);
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("fc=5.85 Hz b=3 Hz alpha=25"), std::string::npos) << r.out;
  const auto m = read_json_file(d / "out" / "magnify.json");
  EXPECT_DOUBLE_EQ(m["spec"]["center_hz"].get<double>(), 5.85);
  EXPECT_DOUBLE_EQ(m["spec"]["width_hz"].get<double>(), 3.0);
  EXPECT_DOUBLE_EQ(m["spec"]["alpha"].get<double>(), 25.0);
  const auto cfg = read_json_file(d / "out" / "config.json");
  EXPECT_DOUBLE_EQ(cfg["bands"][0]["alpha"].get<double>(), 25.0);
  EXPECT_EQ(io::load_sequence(d / "out", 100).frame_count(), 16u);
}

TEST(Cli, SynthSpectrumMagnifyGainChain) {
  const auto d = testing_support::temp_dir("cli_chain");
  std::ofstream(d / "g.json") << R"({"background": 0.25, "amplitude": 0.5, "peak_displacement_px": 0.1, "frame_count": 500})";
  auto r = cli("synth gaussian --config " + q(d / "g.json") + " --out " + q(d / "frames"), d);
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(fs::exists(d / "frames" / "ground_truth.json"));
  const std::string roi = " --roi '64,64;60,64;68,64'";
  r = cli("estimate --input " + q(d / "frames") + " --fps 500 --lambda 16" + roi + " --out " + q(d / "est"), d);
  ASSERT_EQ(r.status, 0) << r.err;
  r = cli("spectrum --input " + q(d / "est" / "motion.csv") + " --out " + q(d / "spec"), d);
  ASSERT_EQ(r.status, 0) << r.err;
  const auto peaks = read_json_file(d / "spec" / "peaks.json");
  ASSERT_GE(peaks["peaks"].size(), 1u);
  EXPECT_NEAR(peaks["peaks"][0]["frequency_hz"].get<double>(), 5.0, 1.0);
  r = cli("magnify --input " + q(d / "frames") + " --fps 500 --lambda 16 --fc 5 --b 3 --alpha 10 --out " + q(d / "mag"), d);
  ASSERT_EQ(r.status, 0) << r.err;
  r = cli("estimate --input " + q(d / "mag") + " --fps 500 --lambda 16" + roi + " --out " + q(d / "est_mag"), d);
  ASSERT_EQ(r.status, 0) << r.err;
  r = cli("gain --before " + q(d / "est" / "motion.csv") + " --after " + q(d / "est_mag" / "motion.csv") +
              " --fc 5 --b 3 --alpha 10 --out " + q(d / "gain"),
          d);
  ASSERT_EQ(r.status, 0) << r.err;
  const auto g = read_json_file(d / "gain" / "gain.json");
  EXPECT_NEAR(g["in_band_gain"].get<double>(), 10.0, 2.0);
}

TEST(Cli, ReportAgainstItselfIsConsistent) {
  const auto d = testing_support::temp_dir("cli_report");
  std::ofstream(d / "beam.json") << R"({"width": 256, "height": 64, "root_x_px": 16, "length_px": 224,
    "center_y_px": 31.5, "thickness_px": 10, "frame_count": 500,
    "modes": [{"index": 1, "frequency_hz": 5.85, "tip_amplitude_px": 0.3, "damping_ratio": 0.01}]})";
  auto r = cli("synth beam --config " + q(d / "beam.json") + " --out " + q(d / "frames"), d);
  ASSERT_EQ(r.status, 0) << r.err;
  std::ofstream(d / "a.json") << R"({"input": "frames", "fps": 500, "gabor": {"lambda": 16, "theta": 1.5707963267948966},
    "roi": {"points": [[180, 27], [200, 27], [230, 36]]}})";
  r = cli("report --baseline " + q(d / "a.json") + " --test " + q(d / "a.json") + " --out " + q(d / "out"), d);
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find(std::string("verdict: ") + to_string(Verdict::baseline_consistent)), std::string::npos) << r.out;
  const auto j = read_json_file(d / "out" / "report.json");
  ASSERT_EQ(j["modes"].size(), 1u);
  EXPECT_DOUBLE_EQ(j["modes"][0]["mac"].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(j["modes"][0]["frequency_shift_hz"].get<double>(), 0.0);
  const auto cfg = read_json_file(d / "out" / "config.json");
  EXPECT_DOUBLE_EQ(cfg["thresholds"]["freq_threshold_hz"].get<double>(), 0.6);
  EXPECT_DOUBLE_EQ(cfg["thresholds"]["mac_threshold"].get<double>(), 0.85);
  // Threshold flags are echoed too.
  r = cli("report --baseline " + q(d / "a.json") + " --test " + q(d / "a.json") + " --freq-threshold 0.4 --mac-threshold 0.9 --out " +
              q(d / "out2"),
          d);
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_DOUBLE_EQ(read_json_file(d / "out2" / "config.json")["thresholds"]["mac_threshold"].get<double>(), 0.9);
}

TEST(Cli, ErrorsAreOneLineWithStage) {
  const auto d = testing_support::temp_dir("cli_errors");
  auto r = cli("estimate --input " + q(d / "nope") + " --fps 100 --lambda 8 --out " + q(d / "out"), d);
  EXPECT_EQ(r.status, 1);
  EXPECT_EQ(r.err.rfind("phasevib: error: config: ", 0), 0u) << r.err;
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
  r = cli("magnify --input x --fps 100 --out " + q(d / "out"), d);  // --fc is required
  EXPECT_EQ(r.status, 1);
  EXPECT_EQ(r.err.rfind("phasevib: error: cli: ", 0), 0u) << r.err;
  write_static_frames(d / "frames", 4);
  r = cli("estimate --input " + q(d / "frames") + " --fps 100 --lambda 8 --roi '500,500' --out " + q(d / "out"), d);
  EXPECT_EQ(r.status, 1);
  EXPECT_EQ(r.err.rfind("phasevib: error: ", 0), 0u) << r.err;
  EXPECT_NE(r.err.find("outside"), std::string::npos) << r.err;
  r = cli("estimate --input " + q(d / "frames") + " --fps 100 --lambda 8 --threshold 1.5 --out " + q(d / "out"), d);
  EXPECT_EQ(r.status, 1);
}

TEST(Cli, LockedOutputDirectoryRefused) {
  const auto d = testing_support::temp_dir("cli_lock");
  write_static_frames(d / "frames", 4);
  fs::create_directories(d / "out");
  std::ofstream(d / "out" / ".phasevib.lock") << "";
  const auto r = cli("estimate --input " + q(d / "frames") + " --fps 100 --lambda 8 --roi '20,20' --out " + q(d / "out"), d);
  EXPECT_EQ(r.status, 1);
  EXPECT_EQ(r.err.rfind("phasevib: error: lock: ", 0), 0u) << r.err;
  EXPECT_FALSE(fs::exists(d / "out" / "motion.csv"));
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const auto d = testing_support::temp_dir("cli_config");
  write_static_frames(d / "frames", 8);
  std::ofstream(d / "c.json") << R"({"input": "frames", "fps": 100, "gabor": {"lambda": 8}, "roi": {"points": [[20, 20]]}})";
  const auto r = cli("estimate --config " + q(d / "c.json") + " --lambda 10 --out " + q(d / "out"), d);
  ASSERT_EQ(r.status, 0) << r.err;
  const auto cfg = read_json_file(d / "out" / "config.json");
  EXPECT_DOUBLE_EQ(cfg["gabor"]["lambda"].get<double>(), 10.0);
  EXPECT_DOUBLE_EQ(cfg["gabor"]["sigma"].get<double>(), 5.0);
  EXPECT_DOUBLE_EQ(cfg["fps"].get<double>(), 100.0);
  EXPECT_EQ(cfg["version"], kVersion);
}

TEST(Cli, EnhanceAndKernelArtifacts) {
  const auto d = testing_support::temp_dir("cli_enh");
  std::vector<Frame> frames;
  for (int k = 0; k < 3; ++k) {
    std::vector<double> px(32 * 32);
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = (50.0 / 255.0) * static_cast<double>(i % 32) / 31.0;
    frames.push_back(Frame(32, 32, px));
  }
  io::write_sequence(VideoSequence(frames, 100.0), d / "frames");
  auto r = cli("enhance --input " + q(d / "frames") + " --fps 100 --out " + q(d / "enh"), d);
  ASSERT_EQ(r.status, 0) << r.err;
  const auto e = read_json_file(d / "enh" / "enhance.json");
  EXPECT_FALSE(e["degenerate"].get<bool>());
  EXPECT_TRUE(fs::exists(d / "enh" / "histogram.csv"));
  EXPECT_TRUE(fs::exists(d / "enh" / "histogram_enh.csv"));
  r = cli("kernel --lambda 8 --out " + q(d / "k"), d);
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(read_json_file(d / "k" / "kernel.json")["support_radius"].get<int>(), 12);
}
