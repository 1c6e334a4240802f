#pragma once

// Discretized complex 2D Gabor wavelets.
//
//   g(x, y) = exp(-(x'^2 + gamma^2 y'^2) / (2 sigma^2)) * exp(i (2 pi x' / lambda + psi))
//   x' =  x cos(theta) + y sin(theta)
//   y' = -x sin(theta) + y cos(theta)

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "phasevib/error.hpp"

namespace phasevib {

struct GaborParams {
  double lambda = 16.0;  // wavelength of the carrier, pixels
  double theta = 0.0;    // orientation, radians; selects the motion direction
  double psi = 0.0;      // phase offset, radians
  double sigma = 8.0;    // envelope standard deviation, pixels
  double gamma = 1.0;    // spatial aspect ratio

  /// Default tie: sigma = lambda / 2, gamma = 1, psi = 0.
  static GaborParams with_wavelength(double lambda, double theta = 0.0) {
    return GaborParams{lambda, theta, 0.0, lambda / 2.0, 1.0};
  }

  void validate() const {
    if (!(lambda > 0.0)) throw Error("Gabor lambda must be positive", "gabor");
    if (!(sigma > 0.0)) throw Error("Gabor sigma must be positive", "gabor");
    if (!(gamma > 0.0)) throw Error("Gabor gamma must be positive", "gabor");
    if (!std::isfinite(theta) || !std::isfinite(psi)) throw Error("Gabor theta/psi must be finite", "gabor");
  }

  /// Phase advance per pixel of motion along theta (h = 2 pi / lambda).
  double phase_gain() const { return 2.0 * std::numbers::pi / lambda; }
};

struct RotatedCoords {
  double x_prime;
  double y_prime;
};

inline RotatedCoords rotate_coords(double x, double y, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {x * c + y * s, -x * s + y * c};
}

/// Closed-form Gabor value at a real-valued offset.
inline std::complex<double> gabor_value(const GaborParams& p, double x, double y) {
  const auto [xp, yp] = rotate_coords(x, y, p.theta);
  const double envelope = std::exp(-(xp * xp + p.gamma * p.gamma * yp * yp) / (2.0 * p.sigma * p.sigma));
  const double arg = 2.0 * std::numbers::pi * xp / p.lambda + p.psi;
  return {envelope * std::cos(arg), envelope * std::sin(arg)};
}

/// Gabor samples on the square grid [-r, r]^2 at integer offsets from the center.
class GaborKernel {
 public:
  GaborKernel(const GaborParams& params, int support_radius) : params_(params), radius_(support_radius) {
    params_.validate();
    const int n = side();
    values_.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (int y = -radius_; y <= radius_; ++y)
      for (int x = -radius_; x <= radius_; ++x) values_[index(x, y)] = gabor_value(params_, x, y);
  }

  const GaborParams& params() const { return params_; }
  int support_radius() const { return radius_; }
  int side() const { return 2 * radius_ + 1; }

  /// Offsets (x, y) in [-r, r].
  std::complex<double> operator()(int x, int y) const { return values_[index(x, y)]; }
  double real(int x, int y) const { return values_[index(x, y)].real(); }
  double imag(int x, int y) const { return values_[index(x, y)].imag(); }

  /// Sum of the Gaussian envelope over the grid.
  double envelope_sum() const {
    double s = 0.0;
    for (const auto& v : values_) s += std::abs(v);
    return s;
  }

  /// Response to a constant unit image: the sum of all kernel samples.
  std::complex<double> dc_response() const {
    std::complex<double> s{};
    for (const auto& v : values_) s += v;
    return s;
  }

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y + radius_) * static_cast<std::size_t>(side()) +
           static_cast<std::size_t>(x + radius_);
  }

  GaborParams params_;
  int radius_;
  std::vector<std::complex<double>> values_;
};

inline constexpr int kDefaultMaxSupportRadius = 257;

/// Support radius ceil(truncation_sigmas * sigma * max(1, 1/gamma)).
inline int support_radius_for(const GaborParams& params, double truncation_sigmas = 3.0) {
  return static_cast<int>(std::ceil(truncation_sigmas * params.sigma * std::max(1.0, 1.0 / params.gamma) - 1e-9));
}

inline GaborKernel make_kernel(const GaborParams& params, double truncation_sigmas = 3.0,
                               int max_support_radius = kDefaultMaxSupportRadius) {
  params.validate();
  if (!(truncation_sigmas > 0.0)) throw Error("truncation_sigmas must be positive", "gabor");
  const int r = support_radius_for(params, truncation_sigmas);
  if (r > max_support_radius)
    throw Error("Gabor support radius " + std::to_string(r) + " exceeds cap " + std::to_string(max_support_radius) +
                    "; check lambda/sigma/gamma",
                "gabor");
  return GaborKernel(params, r);
}

}  // namespace phasevib
