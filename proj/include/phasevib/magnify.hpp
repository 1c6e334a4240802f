#pragma once

// Phase-based motion magnification in a narrow temporal band.
//
// Coefficient phases are unwrapped in time, band-pass filtered with an ideal
// (brick-wall) DFT-domain filter, scaled, and recombined with the original
// amplitudes. The image is then re-synthesized by adding the regularized
// inverse transform of the coefficient change to the input frame, which leaves
// everything the single Gabor band does not see untouched.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "phasevib/error.hpp"
#include "phasevib/fft.hpp"
#include "phasevib/gabor.hpp"
#include "phasevib/image_core.hpp"
#include "phasevib/pme.hpp"
#include "phasevib/spectral.hpp"

namespace phasevib {

/// Gain `alpha` for |f - center_hz| <= width_hz / 2.
///
/// A general rational filter A(L)/B(L) in the lag operator would fit the same
/// slot; offline processing lets the ideal response be applied directly.
struct BandpassSpec {
  double center_hz = 5.0;
  double width_hz = 3.0;
  double alpha = 10.0;

  double low_hz() const { return center_hz - 0.5 * width_hz; }
  double high_hz() const { return center_hz + 0.5 * width_hz; }

  void validate(double frame_rate_hz) const {
    if (!(width_hz > 0.0)) throw Error("passband width must be positive", "magnify");
    if (!(low_hz() > 0.0)) throw Error("passband must lie above 0 Hz (f_c - b/2 > 0)", "magnify");
    if (!(high_hz() < 0.5 * frame_rate_hz)) throw Error("passband must lie below Nyquist (f_c + b/2 < fps/2)", "magnify");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw Error("magnification factor must be >= 0", "magnify");
  }
};

/// Ideal band extraction for series of one fixed length.
class TemporalBandpass {
 public:
  TemporalBandpass(std::size_t length, double low_hz, double high_hz, double frame_rate_hz)
      : fft_(static_cast<int>(length)) {
    if (length < 4) throw Error("band-pass needs >= 4 samples", "magnify");
    const double df = frame_rate_hz / static_cast<double>(length);
    const double tol = 1e-9 * df;
    keep_.assign(static_cast<std::size_t>(fft_.bins()), 0);
    for (int k = 1; k < fft_.bins(); ++k) {
      const double f = k * df;
      if (f >= low_hz - tol && f <= high_hz + tol) {
        keep_[static_cast<std::size_t>(k)] = 1;
        ++kept_;
      }
    }
    if (kept_ == 0)
      throw Error("pass band [" + std::to_string(low_hz) + ", " + std::to_string(high_hz) +
                      "] Hz contains no DFT bin; widen b or record longer",
                  "magnify");
  }

  std::size_t length() const { return static_cast<std::size_t>(fft_.size()); }
  std::size_t kept_bins() const { return kept_; }

  /// Unit-gain band component of `in` (its DC is always removed).
  void band(std::span<const double> in, std::span<double> out) {
    auto buf = fft_.real();
    std::copy(in.begin(), in.end(), buf.begin());
    fft_.forward();
    auto X = fft_.spectrum();
    for (std::size_t k = 0; k < X.size(); ++k)
      if (!keep_[k]) X[k] = 0.0;
    fft_.backward();
    const double scale = 1.0 / static_cast<double>(fft_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = buf[i] * scale;
  }

 private:
  fft::Real1d fft_;
  std::vector<unsigned char> keep_;
  std::size_t kept_ = 0;
};

/// temporal_mean(series) + alpha * idealBP(series - temporal_mean).
inline std::vector<double> bandpass_phase(std::span<const double> series, const BandpassSpec& spec,
                                          double frame_rate_hz) {
  spec.validate(frame_rate_hz);
  TemporalBandpass bp(series.size(), spec.low_hz(), spec.high_hz(), frame_rate_hz);
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(series.size());
  std::vector<double> out(series.size());
  bp.band(series, out);
  for (double& v : out) v = mean + spec.alpha * v;
  return out;
}

/// Phase manipulation for every pixel and frame.
///
/// The manipulated phase is Phi = phi + shift, with phi the time-unwrapped
/// coefficient phase and shift = (alpha - 1) * idealBP(phi): the band gets gain
/// alpha while out-of-band phase variation passes with unit gain.
struct FilteredPhaseStack {
  int width = 0;
  int height = 0;
  std::size_t frames = 0;
  std::vector<float> shift;  // [pixel][frame]
  BandpassSpec spec;
  GaborParams params;

  std::span<const float> pixel(std::size_t i) const { return {shift.data() + i * frames, frames}; }
};

inline FilteredPhaseStack filter_phase_stack(const VideoSequence& video, const GaborParams& params,
                                             const BandpassSpec& spec) {
  if (video.frame_count() < 4) throw Error("magnification needs >= 4 frames", "magnify");
  spec.validate(video.frame_rate_hz());
  TemporalBandpass bp(video.frame_count(), spec.low_hz(), spec.high_hz(), video.frame_rate_hz());
  const GaborKernel kernel = make_kernel(params);
  GaborTransform tf(kernel, video.width(), video.height());

  const std::size_t npx = static_cast<std::size_t>(video.width()) * static_cast<std::size_t>(video.height());
  const std::size_t nt = video.frame_count();
  FilteredPhaseStack st{video.width(), video.height(), nt, std::vector<float>(npx * nt), spec, params};

  std::vector<cplx> field(npx);
  std::vector<double> last(npx, 0.0);
  std::vector<double> unwrapped(npx, 0.0);
  for (std::size_t t = 0; t < nt; ++t) {
    tf.apply(video[t], field);
    for (std::size_t i = 0; i < npx; ++i) {
      const double a = principal_arg(field[i]);
      unwrapped[i] = t == 0 ? a : unwrapped[i] + wrap_phase(a - last[i]);
      last[i] = a;
      st.shift[i * nt + t] = static_cast<float>(unwrapped[i]);
    }
  }

  const double gain = spec.alpha - 1.0;
  std::vector<double> series(nt);
  std::vector<double> band(nt);
  for (std::size_t i = 0; i < npx; ++i) {
    float* row = st.shift.data() + i * nt;
    if (gain == 0.0) {
      std::fill(row, row + nt, 0.0f);
      continue;
    }
    for (std::size_t t = 0; t < nt; ++t) series[t] = row[t];
    bp.band(series, band);
    for (std::size_t t = 0; t < nt; ++t) row[t] = static_cast<float>(gain * band[t]);
  }
  return st;
}

struct MagnifyOptions {
  double clamp_warning_fraction = 0.01;
};

struct MagnifyResult {
  VideoSequence video;
  BandpassSpec spec;
  GaborParams params;
  double clamped_fraction = 0.0;
  std::vector<std::string> warnings;
};

inline MagnifyResult magnify_video(const VideoSequence& video, const GaborParams& params, const BandpassSpec& spec,
                                   const MagnifyOptions& options = {}) {
  const auto stack = filter_phase_stack(video, params, spec);
  const GaborKernel kernel = make_kernel(params);
  GaborTransform tf(kernel, video.width(), video.height());
  const std::size_t npx = stack.shift.size() / std::max<std::size_t>(1, stack.frames);
  const std::size_t nt = stack.frames;

  std::vector<cplx> field(npx);
  std::vector<cplx> delta(npx);
  std::vector<Frame> out;
  out.reserve(nt);
  std::size_t clamped = 0;
  for (std::size_t t = 0; t < nt; ++t) {
    const Frame& in = video[t];
    std::vector<double> px(in.pixels().begin(), in.pixels().end());
    if (spec.alpha != 1.0) {
      tf.apply(in, field);
      for (std::size_t i = 0; i < npx; ++i) {
        const double s = stack.shift[i * nt + t];
        delta[i] = field[i] * (std::polar(1.0, s) - 1.0);
      }
      const auto add = tf.reconstruct(delta);
      for (std::size_t i = 0; i < npx; ++i) {
        const double v = px[i] + add[i];
        if (v < 0.0 || v > 1.0) ++clamped;
        px[i] = std::clamp(v, 0.0, 1.0);
      }
    }
    out.emplace_back(in.width(), in.height(), std::move(px), in.bit_depth());
  }

  MagnifyResult r{VideoSequence(std::move(out), video.frame_rate_hz()), spec, params, 0.0, {}};
  r.clamped_fraction = static_cast<double>(clamped) / static_cast<double>(npx * nt);
  if (r.clamped_fraction > options.clamp_warning_fraction) {
    std::ostringstream os;
    os << "magnified output clamped " << 100.0 * r.clamped_fraction << "% of pixels to [0,1]";
    r.warnings.push_back(os.str());
  }
  return r;
}

struct PeakGain {
  double frequency_hz = 0.0;
  double gain = 0.0;
};

struct BandGainReport {
  double in_band_gain = 0.0;
  /// Out-of-band peak ratio furthest from 1 (1 when there is no out-of-band peak).
  double out_of_band_gain = 1.0;
  std::vector<PeakGain> out_of_band_peaks;
  BandpassSpec spec;
};

namespace detail {

inline double guarded_ratio(double num, double den) {
  if (num == 0.0) return 0.0;
  return num / std::max(den, std::numeric_limits<double>::min());
}

}  // namespace detail

/// Compares spectra of the same points before and after magnification.
/// `peak_fraction` sets which out-of-band local maxima count as peaks,
/// relative to the largest out-of-band magnitude.
inline BandGainReport band_gain_report(const MotionSignal& before, const MotionSignal& after, const BandpassSpec& spec,
                                       double peak_fraction = 0.1) {
  if (before.length() != after.length() || before.point_count() != after.point_count())
    throw Error("band gain: signal lengths differ", "gain");
  if (std::abs(before.frame_rate_hz - after.frame_rate_hz) > 1e-9 * before.frame_rate_hz)
    throw Error("band gain: frame rates differ", "gain");
  MotionSignal b = before;
  MotionSignal a = after;
  for (std::size_t p = 0; p < b.point_count(); ++p) {
    const bool ok = before.reliable[p] && after.reliable[p];
    b.reliable[p] = ok;
    a.reliable[p] = ok;
  }
  const Spectrum sb = mean_spectrum(b);
  const Spectrum sa = mean_spectrum(a);

  BandGainReport r;
  r.spec = spec;
  double eb = 0.0;
  double ea = 0.0;
  double oob_max = 0.0;
  auto in_band = [&](double f) { return std::abs(f - spec.center_hz) <= 0.5 * spec.width_hz + 1e-9 * sb.resolution_hz; };
  for (std::size_t k = 1; k < sb.size(); ++k) {
    if (in_band(sb.frequencies[k])) {
      eb += sb.magnitudes[k] * sb.magnitudes[k];
      ea += sa.magnitudes[k] * sa.magnitudes[k];
    } else {
      oob_max = std::max(oob_max, sb.magnitudes[k]);
    }
  }
  r.in_band_gain = detail::guarded_ratio(std::sqrt(ea), std::sqrt(eb));

  double worst = 1.0;
  for (std::size_t k = 1; k + 1 < sb.size(); ++k) {
    const double m = sb.magnitudes[k];
    if (in_band(sb.frequencies[k]) || m < peak_fraction * oob_max || m <= 0.0) continue;
    if (!(m > sb.magnitudes[k - 1] && m >= sb.magnitudes[k + 1])) continue;
    const double g = detail::guarded_ratio(sa.magnitudes[k], m);
    r.out_of_band_peaks.push_back({sb.frequencies[k], g});
    if (std::abs(g - 1.0) > std::abs(worst - 1.0)) worst = g;
  }
  r.out_of_band_gain = worst;
  return r;
}

}  // namespace phasevib
