#pragma once

// Independent oracles and small fixtures shared by the unit tests.

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "phasevib/gabor.hpp"
#include "phasevib/image_core.hpp"

namespace testing_support {

using phasevib::Frame;
using phasevib::GaborParams;
using phasevib::VideoSequence;

/// C(u,v) = sum_x sum_y I(x,y) g(x-u, y-v) by direct summation over the
/// kernel support, with reflect-101 indexing outside the frame.
inline std::complex<double> brute_force_coefficient(const Frame& f, const GaborParams& p, int radius, int u, int v) {
  auto reflect = [](int i, int n) {
    if (i < 0) return -i;
    if (i >= n) return 2 * (n - 1) - i;
    return i;
  };
  std::complex<double> acc{};
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) {
      const int x = reflect(u + dx, f.width());
      const int y = reflect(v + dy, f.height());
      const double xp = dx * std::cos(p.theta) + dy * std::sin(p.theta);
      const double yp = -dx * std::sin(p.theta) + dy * std::cos(p.theta);
      const double env = std::exp(-(xp * xp + p.gamma * p.gamma * yp * yp) / (2 * p.sigma * p.sigma));
      const double arg = 2 * std::numbers::pi * xp / p.lambda + p.psi;
      acc += f(x, y) * env * std::complex<double>(std::cos(arg), std::sin(arg));
    }
  return acc;
}

inline Frame random_frame(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> px(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  for (double& v : px) v = u(rng);
  return Frame(w, h, std::move(px));
}

/// Smooth texture with a few plane waves near spatial period `period`,
/// sampled with the pattern displaced by (sx, sy).
struct Texture {
  std::vector<double> kx, ky, phase, amp;

  static Texture band_limited(double period, std::uint64_t seed, int waves = 6) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Texture t;
    for (int i = 0; i < waves; ++i) {
      const double f = (0.8 + 0.4 * u(rng)) / period;
      const double dir = (u(rng) - 0.5) * std::numbers::pi / 2.0;  // mostly along x
      t.kx.push_back(2 * std::numbers::pi * f * std::cos(dir));
      t.ky.push_back(2 * std::numbers::pi * f * std::sin(dir));
      t.phase.push_back(2 * std::numbers::pi * u(rng));
      t.amp.push_back(0.5 + 0.5 * u(rng));
    }
    return t;
  }

  /// Waves that all share the spatial frequency 1/period along x, so a shift
  /// along x changes every component's phase by the same amount.
  static Texture at_wavelength(double period, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Texture t;
    const double k = 2 * std::numbers::pi / period;
    const double amps[] = {1.0, 0.3, 0.2};
    for (double a : amps) {
      t.kx.push_back(k);
      t.ky.push_back(k * 0.4 * (u(rng) - 0.5));
      t.phase.push_back(2 * std::numbers::pi * u(rng));
      t.amp.push_back(a);
    }
    return t;
  }

  Frame render(int w, int h, double sx, double sy) const {
    double total = 0.0;
    for (double a : amp) total += a;
    std::vector<double> px(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double s = 0.0;
        for (std::size_t i = 0; i < kx.size(); ++i) s += amp[i] * std::cos(kx[i] * (x - sx) + ky[i] * (y - sy) + phase[i]);
        px[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] = 0.5 + 0.45 * s / total;
      }
    return Frame(w, h, std::move(px), 16);
  }
};

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("phasevib_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing_support
