#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "phasevib/error.hpp"
#include "phasevib/fft.hpp"
#include "phasevib/pme.hpp"

namespace phasevib {

/// Single-sided amplitude spectrum, 0 .. Nyquist.
///
/// Magnitudes are scaled so a sinusoid of amplitude a on an exact bin reads a
/// (2|X_k|/N, with |X_k|/N at DC and Nyquist). Rectangular window.
struct Spectrum {
  std::vector<double> frequencies;
  std::vector<double> magnitudes;
  double resolution_hz = 0.0;  // frame_rate / N
  std::size_t sample_count = 0;

  std::size_t size() const { return frequencies.size(); }
  double nyquist() const { return frequencies.empty() ? 0.0 : 0.5 * resolution_hz * static_cast<double>(sample_count); }
};

inline Spectrum spectrum_of(std::span<const double> series, double frame_rate_hz) {
  if (series.size() < 8) throw Error("spectrum needs >= 8 samples", "spectrum");
  if (!(frame_rate_hz > 0.0)) throw Error("frame rate must be positive", "spectrum");
  const int n = static_cast<int>(series.size());
  fft::Real1d f(n);
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= n;
  auto in = f.real();
  for (int i = 0; i < n; ++i) in[static_cast<std::size_t>(i)] = series[static_cast<std::size_t>(i)] - mean;
  f.forward();
  Spectrum s;
  s.sample_count = series.size();
  s.resolution_hz = frame_rate_hz / n;
  const auto X = f.spectrum();
  for (int k = 0; k < f.bins(); ++k) {
    s.frequencies.push_back(k * s.resolution_hz);
    const bool edge = k == 0 || (n % 2 == 0 && k == n / 2);
    s.magnitudes.push_back(std::abs(X[static_cast<std::size_t>(k)]) * (edge ? 1.0 : 2.0) / n);
  }
  return s;
}

inline Spectrum spectrum(const MotionSignal& signal, std::size_t point_index) {
  if (point_index >= signal.point_count()) throw Error("point index out of range", "spectrum");
  if (!signal.reliable[point_index])
    throw Error("point " + std::to_string(point_index) + " is masked as unreliable", "spectrum");
  return spectrum_of(signal.displacement[point_index], signal.frame_rate_hz);
}

/// Average magnitude spectrum over the reliable points.
inline Spectrum mean_spectrum(const MotionSignal& signal) {
  Spectrum acc;
  std::size_t used = 0;
  for (std::size_t p = 0; p < signal.point_count(); ++p) {
    if (!signal.reliable[p]) continue;
    auto s = spectrum(signal, p);
    if (used == 0) {
      acc = std::move(s);
    } else {
      for (std::size_t k = 0; k < acc.size(); ++k) acc.magnitudes[k] += s.magnitudes[k];
    }
    ++used;
  }
  if (used == 0) throw Error("no reliable points for spectrum", "spectrum");
  for (double& m : acc.magnitudes) m /= static_cast<double>(used);
  return acc;
}

}  // namespace phasevib
