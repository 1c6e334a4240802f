#pragma once

// Ground-truth synthetic videos: a damped, oscillating 2D Gaussian surface and
// a clamped-free beam rendered as a bright silhouette.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "phasevib/error.hpp"
#include "phasevib/image_core.hpp"

namespace phasevib::synth {

struct GaussianSurfaceConfig {
  double amplitude = 1.0;          // A
  double std_px = 2.0;             // s
  int width = 128;
  int height = 128;
  double background = 0.0;
  double damping_ratio = 0.02;     // xi
  double natural_frequency_rad_s = 2.0 * std::numbers::pi * 5.0;  // omega_n
  double peak_displacement_px = 2.0;
  double frame_rate_hz = 500.0;
  int frame_count = 2000;
  double noise_std = 0.0;          // truncated at +-4 std
  std::uint64_t seed = 1;
  int bit_depth = 16;
};

struct GaussianSurfaceVideo {
  VideoSequence video;
  std::vector<double> displacement_px;  // applied x-motion per frame
};

inline constexpr double kNoiseTruncation = 4.0;

namespace detail {

/// Normal deviates truncated to +-kNoiseTruncation std by rejection.
class TruncatedNoise {
 public:
  TruncatedNoise(double std_dev, std::uint64_t seed) : std_(std_dev), rng_(seed) {}

  double operator()() {
    if (std_ <= 0.0) return 0.0;
    for (;;) {
      const double z = normal_(rng_);
      if (std::abs(z) <= kNoiseTruncation) return std_ * z;
    }
  }

 private:
  double std_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline void check_frame_rate(double fps, int frames) {
  if (!(fps > 0.0)) throw Error("frame rate must be positive", "synth");
  if (frames < 2) throw Error("need >= 2 frames", "synth");
}

}  // namespace detail

/// d_peak * exp(-xi wn t) * sin(wn t)
inline double damped_displacement(const GaussianSurfaceConfig& c, double t) {
  const double wn = c.natural_frequency_rad_s;
  return c.peak_displacement_px * std::exp(-c.damping_ratio * wn * t) * std::sin(wn * t);
}

inline void validate(const GaussianSurfaceConfig& c) {
  detail::check_frame_rate(c.frame_rate_hz, c.frame_count);
  if (!(c.std_px > 0.0)) throw Error("surface std must be positive", "synth");
  if (!(c.damping_ratio >= 0.0 && c.damping_ratio < 1.0)) throw Error("damping ratio must lie in [0,1)", "synth");
  if (!(c.natural_frequency_rad_s > 0.0)) throw Error("natural frequency must be positive", "synth");
  if (c.width < 2 || c.height < 2) throw Error("grid too small", "synth");
  const double lo = c.background - kNoiseTruncation * c.noise_std;
  const double hi = c.background + c.amplitude + kNoiseTruncation * c.noise_std;
  if (!(c.amplitude > 0.0) || lo < 0.0 || hi > 1.0)
    throw Error("surface intensities would leave [0,1]", "synth");
  const double cx = 0.5 * (c.width - 1);
  const double reach = std::abs(c.peak_displacement_px) + 3.0 * c.std_px;
  if (reach > cx) throw Error("surface displacement exceeds grid", "synth");
}

inline GaussianSurfaceVideo gaussian_surface_video(const GaussianSurfaceConfig& c) {
  validate(c);
  const double cx = 0.5 * (c.width - 1);
  const double cy = 0.5 * (c.height - 1);
  const double inv2s2 = 1.0 / (2.0 * c.std_px * c.std_px);
  detail::TruncatedNoise noise(c.noise_std, c.seed);

  std::vector<double> gy(static_cast<std::size_t>(c.height));
  for (int y = 0; y < c.height; ++y) gy[static_cast<std::size_t>(y)] = std::exp(-(y - cy) * (y - cy) * inv2s2);

  GaussianSurfaceVideo out;
  std::vector<Frame> frames;
  frames.reserve(static_cast<std::size_t>(c.frame_count));
  std::vector<double> gx(static_cast<std::size_t>(c.width));
  for (int k = 0; k < c.frame_count; ++k) {
    const double d = damped_displacement(c, k / c.frame_rate_hz);
    out.displacement_px.push_back(d);
    for (int x = 0; x < c.width; ++x) {
      const double dx = x - cx - d;
      gx[static_cast<std::size_t>(x)] = std::exp(-dx * dx * inv2s2);
    }
    std::vector<double> px(static_cast<std::size_t>(c.width) * static_cast<std::size_t>(c.height));
    for (int y = 0; y < c.height; ++y)
      for (int x = 0; x < c.width; ++x)
        px[static_cast<std::size_t>(y) * static_cast<std::size_t>(c.width) + static_cast<std::size_t>(x)] =
            c.background + c.amplitude * gx[static_cast<std::size_t>(x)] * gy[static_cast<std::size_t>(y)] + noise();
    frames.emplace_back(c.width, c.height, std::move(px), c.bit_depth);
  }
  out.video = VideoSequence(std::move(frames), c.frame_rate_hz);
  return out;
}

// ---------------------------------------------------------------------------
// Cantilever beam

/// beta_n L for the first four clamped-free bending modes.
inline constexpr std::array<double, 4> kCantileverBetaL = {1.8751040687, 4.6940911330, 7.8547574382, 10.9955407349};

/// Euler-Bernoulli clamped-free shape at normalized span s in [0,1]:
/// cosh(bs) - cos(bs) - k (sinh(bs) - sin(bs)), k = (cosh b + cos b) / (sinh b + sin b).
/// |shape(1)| = 2 for every mode.
inline double cantilever_mode_shape(int mode, double s) {
  if (mode < 1 || mode > static_cast<int>(kCantileverBetaL.size()))
    throw Error("cantilever mode index must be 1..4", "synth");
  const double b = kCantileverBetaL[static_cast<std::size_t>(mode - 1)];
  const double k = (std::cosh(b) + std::cos(b)) / (std::sinh(b) + std::sin(b));
  const double z = b * s;
  return std::cosh(z) - std::cos(z) - k * (std::sinh(z) - std::sin(z));
}

/// Rayleigh-quotient frequency factor for a point mass `mass_fraction` times the
/// beam mass at the tip, keeping the unloaded mode shape.
inline double tip_mass_frequency_factor(int mode, double mass_fraction) {
  if (mass_fraction < 0.0) throw Error("tip mass fraction must be non-negative", "synth");
  // Modal mass per unit beam mass: integral of shape^2 over s in [0,1] (Simpson).
  constexpr int n = 2000;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double s = static_cast<double>(i) / n;
    const double f = cantilever_mode_shape(mode, s);
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * f * f;
  }
  const double modal_mass = acc / (3.0 * n);
  const double tip = cantilever_mode_shape(mode, 1.0);
  return 1.0 / std::sqrt(1.0 + mass_fraction * tip * tip / modal_mass);
}

struct BeamMode {
  int index = 1;                 // 1..4
  double frequency_hz = 5.0;     // unloaded natural frequency
  double tip_amplitude_px = 0.1;
  double damping_ratio = 0.01;
};

struct BeamSceneConfig {
  int width = 512;
  int height = 128;
  int root_x_px = 24;            // columns left of the root render as the clamp block
  double length_px = 464.0;
  double length_m = 2.3;
  double center_y_px = 63.5;
  double thickness_px = 12.0;
  double foreground = 0.8;
  double background = 0.15;
  std::vector<BeamMode> modes = {{1, 5.85, 0.1, 0.01}, {2, 15.63, 0.066, 0.005}, {3, 37.11, 0.04, 0.003},
                                 {4, 60.55, 0.033, 0.002}};
  double tip_mass_fraction = 0.0;
  double noise_std = 0.0;
  std::uint64_t seed = 1;
  double frame_rate_hz = 500.0;
  int frame_count = 2000;
  int supersample = 4;
  double pme_wavelength_px = 24.0;  // used to check the per-frame motion bound
  int bit_depth = 16;
};

struct BeamGroundTruth {
  std::vector<int> mode_index;
  std::vector<double> frequencies_hz;    // after any tip-mass shift
  std::vector<double> span_m;            // sample positions of the analytic shapes
  std::vector<std::vector<double>> shapes;  // per mode, normalized to tip = 1
  std::vector<double> tip_displacement_px;  // per frame
};

struct BeamVideo {
  VideoSequence video;
  BeamGroundTruth truth;
};

inline double beam_mode_frequency(const BeamSceneConfig& c, const BeamMode& m) {
  return m.frequency_hz * tip_mass_frequency_factor(m.index, c.tip_mass_fraction);
}

inline void validate(const BeamSceneConfig& c) {
  detail::check_frame_rate(c.frame_rate_hz, c.frame_count);
  if (c.width < 8 || c.height < 8) throw Error("beam frame too small", "synth");
  if (c.root_x_px < 0 || !(c.length_px > 1.0) || c.root_x_px + c.length_px > c.width)
    throw Error("beam does not fit the frame", "synth");
  if (!(c.length_m > 0.0) || !(c.thickness_px > 0.0)) throw Error("beam length/thickness must be positive", "synth");
  if (c.supersample < 1) throw Error("supersample must be >= 1", "synth");
  const double lo = std::min(c.foreground, c.background) - kNoiseTruncation * c.noise_std;
  const double hi = std::max(c.foreground, c.background) + kNoiseTruncation * c.noise_std;
  if (lo < 0.0 || hi > 1.0) throw Error("beam intensities would leave [0,1]", "synth");
  const double nyquist = 0.5 * c.frame_rate_hz;
  double reach = 0.0;
  double step = 0.0;
  for (std::size_t i = 0; i < c.modes.size(); ++i) {
    const auto& m = c.modes[i];
    if (m.index < 1 || m.index > 4) throw Error("beam mode index must be 1..4", "synth");
    if (!(m.damping_ratio >= 0.0 && m.damping_ratio < 1.0)) throw Error("damping ratio must lie in [0,1)", "synth");
    const double f = beam_mode_frequency(c, m);
    if (!(f > 0.0) || f >= nyquist)
      throw Error("mode " + std::to_string(m.index) + " frequency aliased (>= Nyquist)", "synth");
    for (std::size_t j = 0; j < i; ++j) {
      if (c.modes[j].index == m.index) throw Error("mode " + std::to_string(m.index) + " listed twice", "synth");
      if (std::abs(beam_mode_frequency(c, c.modes[j]) - f) < c.frame_rate_hz / c.frame_count)
        throw Error("modes overlap within one frequency bin", "synth");
    }
    reach += std::abs(m.tip_amplitude_px);
    step += 2.0 * std::numbers::pi * f * std::abs(m.tip_amplitude_px) / c.frame_rate_hz;
  }
  if (c.center_y_px - 0.5 * c.thickness_px - reach < 0.0 || c.center_y_px + 0.5 * c.thickness_px + reach > c.height - 1)
    throw Error("beam deflection leaves the frame", "synth");
  if (step >= c.pme_wavelength_px / 4.0) throw Error("per-frame beam motion exceeds lambda/4", "synth");
}

inline BeamVideo cantilever_beam_video(const BeamSceneConfig& c) {
  validate(c);
  const int ss = c.supersample;
  const std::size_t nsub = static_cast<std::size_t>(c.width) * static_cast<std::size_t>(ss);
  const double x_tip = c.root_x_px + c.length_px;

  // Sub-column centres and their normalized shape values (tip = 1).
  std::vector<double> xs(nsub);
  std::vector<int> region(nsub);  // -1 clamp, 0 background, 1 beam
  std::vector<std::vector<double>> phi(c.modes.size(), std::vector<double>(nsub, 0.0));
  for (std::size_t j = 0; j < nsub; ++j) {
    // Pixel c spans [c - 0.5, c + 0.5].
    xs[j] = static_cast<double>(j / static_cast<std::size_t>(ss)) - 0.5 +
            (static_cast<double>(j % static_cast<std::size_t>(ss)) + 0.5) / ss;
    region[j] = xs[j] < c.root_x_px ? -1 : (xs[j] <= x_tip ? 1 : 0);
    if (region[j] == 1)
      for (std::size_t m = 0; m < c.modes.size(); ++m)
        phi[m][j] = cantilever_mode_shape(c.modes[m].index, (xs[j] - c.root_x_px) / c.length_px) /
                    cantilever_mode_shape(c.modes[m].index, 1.0);
  }

  std::vector<double> omega(c.modes.size());
  BeamVideo out;
  for (std::size_t m = 0; m < c.modes.size(); ++m) {
    const double f = beam_mode_frequency(c, c.modes[m]);
    omega[m] = 2.0 * std::numbers::pi * f;
    out.truth.mode_index.push_back(c.modes[m].index);
    out.truth.frequencies_hz.push_back(f);
  }
  constexpr int kShapeSamples = 101;
  for (int i = 0; i < kShapeSamples; ++i) out.truth.span_m.push_back(c.length_m * i / (kShapeSamples - 1));
  for (const auto& m : c.modes) {
    std::vector<double> s;
    for (int i = 0; i < kShapeSamples; ++i)
      s.push_back(cantilever_mode_shape(m.index, static_cast<double>(i) / (kShapeSamples - 1)) /
                  cantilever_mode_shape(m.index, 1.0));
    out.truth.shapes.push_back(std::move(s));
  }

  detail::TruncatedNoise noise(c.noise_std, c.seed);
  const double half = 0.5 * c.thickness_px;
  const double contrast = c.foreground - c.background;
  std::vector<Frame> frames;
  frames.reserve(static_cast<std::size_t>(c.frame_count));
  std::vector<double> modal(c.modes.size());
  std::vector<double> coverage(static_cast<std::size_t>(c.width) * static_cast<std::size_t>(c.height));

  for (int k = 0; k < c.frame_count; ++k) {
    const double t = k / c.frame_rate_hz;
    double tip = 0.0;
    for (std::size_t m = 0; m < c.modes.size(); ++m) {
      modal[m] = c.modes[m].tip_amplitude_px * std::exp(-c.modes[m].damping_ratio * omega[m] * t) * std::sin(omega[m] * t);
      tip += modal[m];
    }
    out.truth.tip_displacement_px.push_back(tip);

    std::fill(coverage.begin(), coverage.end(), 0.0);
    for (std::size_t j = 0; j < nsub; ++j) {
      const std::size_t col = j / static_cast<std::size_t>(ss);
      if (region[j] == 0) continue;
      if (region[j] < 0) {
        for (int y = 0; y < c.height; ++y) coverage[static_cast<std::size_t>(y) * static_cast<std::size_t>(c.width) + col] += 1.0;
        continue;
      }
      double yc = c.center_y_px;
      for (std::size_t m = 0; m < modal.size(); ++m) yc += modal[m] * phi[m][j];
      const double top = yc - half;
      const double bottom = yc + half;
      const int r0 = std::max(0, static_cast<int>(std::floor(top + 0.5)));
      const int r1 = std::min(c.height - 1, static_cast<int>(std::floor(bottom + 0.5)));
      for (int y = r0; y <= r1; ++y) {
        // Row y spans [y - 0.5, y + 0.5].
        const double overlap = std::min(bottom, y + 0.5) - std::max(top, y - 0.5);
        if (overlap > 0.0) coverage[static_cast<std::size_t>(y) * static_cast<std::size_t>(c.width) + col] += overlap;
      }
    }
    std::vector<double> px(coverage.size());
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = c.background + contrast * (coverage[i] / ss) + noise();
    frames.emplace_back(c.width, c.height, std::move(px), c.bit_depth);
  }
  out.video = VideoSequence(std::move(frames), c.frame_rate_hz);
  return out;
}

}  // namespace phasevib::synth
