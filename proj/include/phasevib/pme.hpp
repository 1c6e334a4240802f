#pragma once

// Phase-based motion estimation.
//
// Each frame is mapped to a complex coefficient field
//     C(u, v) = sum_{x,y} I(x, y) g(x - u, y - v)
// over the truncated Gabor support, with reflect-101 padding at the frame
// border. Motion along the kernel orientation follows from the temporal change
// of arg C: a displacement d advances the phase by (2 pi / lambda) d.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "phasevib/error.hpp"
#include "phasevib/fft.hpp"
#include "phasevib/gabor.hpp"
#include "phasevib/image_core.hpp"

namespace phasevib {

using cplx = std::complex<double>;

struct CoefficientField {
  int width = 0;
  int height = 0;
  std::vector<cplx> values;  // row-major
  GaborParams params;
  std::size_t frame_index = 0;

  cplx operator()(int u, int v) const {
    return values[static_cast<std::size_t>(v) * static_cast<std::size_t>(width) + static_cast<std::size_t>(u)];
  }
};

struct PhaseAmplitude {
  int width = 0;
  int height = 0;
  std::vector<double> phase;      // principal value in (-pi, pi]
  std::vector<double> amplitude;  // |C|
};

/// Principal value in (-pi, pi].
inline double wrap_phase(double a) {
  double w = std::remainder(a, 2.0 * std::numbers::pi);
  if (w <= -std::numbers::pi) w += 2.0 * std::numbers::pi;
  return w;
}

inline double principal_arg(cplx c) {
  if (c == cplx{}) return 0.0;
  const double a = std::arg(c);
  return a <= -std::numbers::pi ? std::numbers::pi : a;
}

inline PhaseAmplitude phase_amplitude(const CoefficientField& field) {
  PhaseAmplitude pa{field.width, field.height, {}, {}};
  pa.phase.resize(field.values.size());
  pa.amplitude.resize(field.values.size());
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    pa.amplitude[i] = std::abs(field.values[i]);
    pa.phase[i] = principal_arg(field.values[i]);
  }
  return pa;
}

namespace detail {

inline int reflect101(int p, int n) {
  if (p < 0) return -p;
  if (p >= n) return 2 * (n - 1) - p;
  return p;
}

}  // namespace detail

/// FFT realization of the Gabor transform for one frame size, plus the
/// regularized inverse used to re-synthesize images from coefficients.
///
/// Not thread-safe: holds a shared FFT work buffer.
class GaborTransform {
 public:
  /// Relative Tikhonov term in the inverse filter conj(K) / (|K|^2 + eps max|K|^2).
  static constexpr double kInverseRegularization = 1e-3;

  GaborTransform(const GaborKernel& kernel, int width, int height)
      : kernel_(kernel), width_(width), height_(height), r_(kernel.support_radius()),
        fft_(fft::good_size(height + 2 * kernel.support_radius()), fft::good_size(width + 2 * kernel.support_radius())) {
    if (kernel.side() > width || kernel.side() > height)
      throw Error("Gabor kernel (" + std::to_string(kernel.side()) + " px) larger than frame " +
                      std::to_string(width) + "x" + std::to_string(height),
                  "transform");
    const int rows = fft_.rows();
    const int cols = fft_.cols();
    auto buf = fft_.data();
    std::fill(buf.begin(), buf.end(), cplx{});
    // Correlation C[j] = sum_i a[i] g(i - j) is the circular convolution of a
    // with k'[m] = g(-m).
    for (int my = -r_; my <= r_; ++my)
      for (int mx = -r_; mx <= r_; ++mx) {
        const int row = ((-my) % rows + rows) % rows;
        const int col = ((-mx) % cols + cols) % cols;
        buf[static_cast<std::size_t>(row) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(col)] =
            kernel(mx, my);
      }
    fft_.forward();
    response_.assign(buf.begin(), buf.end());
    double peak = 0.0;
    for (const auto& k : response_) peak = std::max(peak, std::norm(k));
    const double eps = kInverseRegularization * peak;
    inverse_.resize(response_.size());
    for (std::size_t i = 0; i < response_.size(); ++i) inverse_[i] = std::conj(response_[i]) / (std::norm(response_[i]) + eps);
  }

  const GaborKernel& kernel() const { return kernel_; }
  const GaborParams& params() const { return kernel_.params(); }
  int width() const { return width_; }
  int height() const { return height_; }

  CoefficientField operator()(const Frame& frame, std::size_t frame_index = 0) {
    CoefficientField out{width_, height_, {}, kernel_.params(), frame_index};
    out.values.resize(static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_));
    apply(frame, out.values);
    return out;
  }

  /// Writes C for `frame` into `out` (width * height, row-major).
  void apply(const Frame& frame, std::span<cplx> out) {
    if (frame.width() != width_ || frame.height() != height_)
      throw Error("frame size does not match transform", "transform");
    const int cols = fft_.cols();
    auto buf = fft_.data();
    std::fill(buf.begin(), buf.end(), cplx{});
    const auto px = frame.pixels();
    for (int i = 0; i < height_ + 2 * r_; ++i) {
      const int y = detail::reflect101(i - r_, height_);
      const double* src = px.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(width_);
      cplx* dst = buf.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(cols);
      for (int j = 0; j < width_ + 2 * r_; ++j) dst[j] = src[detail::reflect101(j - r_, width_)];
    }
    filter_and_extract(response_, out);
  }

  /// Real image whose transform best matches `coeffs` (regularized inverse),
  /// as 2 Re(R C). Exact for images whose spectrum lies in the kernel passband.
  std::vector<double> reconstruct(std::span<const cplx> coeffs) {
    if (coeffs.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_))
      throw Error("coefficient field size does not match transform", "transform");
    const int cols = fft_.cols();
    auto buf = fft_.data();
    std::fill(buf.begin(), buf.end(), cplx{});
    for (int v = 0; v < height_; ++v)
      std::copy_n(coeffs.data() + static_cast<std::size_t>(v) * static_cast<std::size_t>(width_), width_,
                  buf.data() + static_cast<std::size_t>(v + r_) * static_cast<std::size_t>(cols) + r_);
    std::vector<cplx> tmp(coeffs.size());
    filter_and_extract(inverse_, tmp);
    std::vector<double> out(tmp.size());
    for (std::size_t i = 0; i < tmp.size(); ++i) out[i] = 2.0 * tmp[i].real();
    return out;
  }

 private:
  void filter_and_extract(const std::vector<cplx>& filter, std::span<cplx> out) {
    auto buf = fft_.data();
    fft_.forward();
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= filter[i];
    fft_.backward();
    const double scale = 1.0 / static_cast<double>(buf.size());
    const int cols = fft_.cols();
    for (int v = 0; v < height_; ++v) {
      const cplx* src = buf.data() + static_cast<std::size_t>(v + r_) * static_cast<std::size_t>(cols) + r_;
      cplx* dst = out.data() + static_cast<std::size_t>(v) * static_cast<std::size_t>(width_);
      for (int u = 0; u < width_; ++u) dst[u] = src[u] * scale;
    }
  }

  GaborKernel kernel_;
  int width_;
  int height_;
  int r_;
  fft::Complex2d fft_;
  std::vector<cplx> response_;
  std::vector<cplx> inverse_;
};

inline CoefficientField transform(const Frame& frame, const GaborKernel& kernel) {
  GaborTransform t(kernel, frame.width(), frame.height());
  return t(frame);
}

/// Per-pixel pass/fail flags on the frame grid.
struct ReliabilityMask {
  int width = 0;
  int height = 0;
  std::vector<unsigned char> pass;

  bool operator()(PixelPoint p) const {
    return pass[static_cast<std::size_t>(p.y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(p.x)] != 0;
  }
  std::size_t count() const { return static_cast<std::size_t>(std::count(pass.begin(), pass.end(), 1)); }
};

inline void check_threshold_fraction(double threshold_fraction) {
  if (!(threshold_fraction > 0.0 && threshold_fraction < 1.0))
    throw Error("reliability threshold fraction must lie in (0, 1)", "estimate");
}

/// A point passes iff its temporal-median amplitude reaches threshold_fraction
/// of the frame-wide maximum and exceeds amplitude_floor.
inline ReliabilityMask reliability_mask_from_medians(std::span<const double> median_amplitude, int width, int height,
                                                     double threshold_fraction, double amplitude_floor = 0.0) {
  check_threshold_fraction(threshold_fraction);
  ReliabilityMask m{width, height, std::vector<unsigned char>(median_amplitude.size(), 0)};
  double peak = 0.0;
  for (double a : median_amplitude) peak = std::max(peak, a);
  if (!(peak > 0.0)) return m;
  const double cut = threshold_fraction * peak;
  for (std::size_t i = 0; i < median_amplitude.size(); ++i)
    m.pass[i] = (median_amplitude[i] >= cut && median_amplitude[i] > amplitude_floor) ? 1 : 0;
  return m;
}

inline double median_inplace(std::span<float> v) {
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  double hi = *mid;
  if (n % 2 == 1) return hi;
  double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

inline ReliabilityMask reliability_mask(std::span<const PhaseAmplitude> series, double threshold_fraction,
                                        double amplitude_floor = 0.0) {
  check_threshold_fraction(threshold_fraction);
  if (series.empty()) throw Error("reliability mask needs at least one frame", "estimate");
  const int w = series[0].width;
  const int h = series[0].height;
  const std::size_t n = series[0].amplitude.size();
  std::vector<double> medians(n);
  std::vector<float> column(series.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < series.size(); ++t) column[t] = static_cast<float>(series[t].amplitude[i]);
    medians[i] = median_inplace(column);
  }
  return reliability_mask_from_medians(medians, w, h, threshold_fraction, amplitude_floor);
}

/// Points at which motion along `theta` is measured.
struct RoiSpec {
  std::vector<PixelPoint> points;
  double theta = 0.0;
};

struct MotionOptions {
  double threshold_fraction = 0.1;
  /// Replace each point's phase step by the amplitude-weighted mean over its 3x3 neighbourhood.
  bool neighborhood_average = false;
  /// Reject points whose amplitude a textureless frame of the mean brightness could produce.
  bool dc_floor = true;
};

/// Displacement series, in pixels along theta, relative to frame 0.
struct MotionSignal {
  std::vector<PixelPoint> points;
  std::vector<std::vector<double>> displacement;  // [point][frame]
  std::vector<bool> reliable;
  std::vector<double> median_amplitude;  // per point
  double frame_rate_hz = 1.0;
  GaborParams params;
  double threshold_fraction = 0.1;

  std::size_t point_count() const { return points.size(); }
  std::size_t length() const { return displacement.empty() ? 0 : displacement.front().size(); }
  std::size_t reliable_count() const { return static_cast<std::size_t>(std::count(reliable.begin(), reliable.end(), true)); }
};

/// Mean brightness of `frame` times |sum g|: what a flat field produces.
/// Slightly inflated since amplitude medians are kept in float.
inline double flat_field_amplitude(const Frame& frame, const GaborKernel& kernel) {
  double mean = 0.0;
  for (double v : frame.pixels()) mean += v;
  mean /= static_cast<double>(frame.size());
  return std::abs(kernel.dc_response()) * mean * (1.0 + 1e-6);
}

namespace detail {

inline void check_roi(const VideoSequence& video, const GaborParams& params, const RoiSpec& roi) {
  if (video.frame_count() < 2) throw Error("need >= 2 frames for motion estimation", "estimate");
  if (roi.points.empty()) throw Error("ROI has no points", "estimate");
  if (std::abs(wrap_phase(roi.theta - params.theta)) > 1e-9)
    throw Error("ROI orientation does not match Gabor theta", "estimate");
  for (const auto& p : roi.points)
    if (!video[0].contains(p))
      throw Error("ROI point (" + std::to_string(p.x) + "," + std::to_string(p.y) + ") outside frame", "estimate");
}

}  // namespace detail

inline MotionSignal estimate_motion(const VideoSequence& video, const GaborParams& params, const RoiSpec& roi,
                                    const MotionOptions& options = {}) {
  detail::check_roi(video, params, roi);
  check_threshold_fraction(options.threshold_fraction);
  const GaborKernel kernel = make_kernel(params);
  GaborTransform tf(kernel, video.width(), video.height());

  const int w = video.width();
  const int h = video.height();
  const std::size_t npx = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  const std::size_t nt = video.frame_count();

  // Sample locations per ROI point (the point itself, or its clipped 3x3 block).
  std::vector<std::vector<std::size_t>> samples(roi.points.size());
  for (std::size_t p = 0; p < roi.points.size(); ++p) {
    const auto c = roi.points[p];
    const int reach = options.neighborhood_average ? 1 : 0;
    for (int dy = -reach; dy <= reach; ++dy)
      for (int dx = -reach; dx <= reach; ++dx) {
        const int x = c.x + dx;
        const int y = c.y + dy;
        if (x < 0 || y < 0 || x >= w || y >= h) continue;
        samples[p].push_back(static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x));
      }
  }

  std::vector<float> amp(npx * nt);  // [pixel][frame]
  std::vector<std::vector<cplx>> prev(roi.points.size());
  std::vector<cplx> field(npx);

  MotionSignal sig;
  sig.points = roi.points;
  sig.frame_rate_hz = video.frame_rate_hz();
  sig.params = params;
  sig.threshold_fraction = options.threshold_fraction;
  sig.displacement.assign(roi.points.size(), std::vector<double>(nt, 0.0));
  const double inv_gain = 1.0 / params.phase_gain();

  for (std::size_t t = 0; t < nt; ++t) {
    tf.apply(video[t], field);
    for (std::size_t i = 0; i < npx; ++i) amp[i * nt + t] = static_cast<float>(std::abs(field[i]));
    for (std::size_t p = 0; p < roi.points.size(); ++p) {
      std::vector<cplx> cur(samples[p].size());
      for (std::size_t s = 0; s < cur.size(); ++s) cur[s] = field[samples[p][s]];
      if (t > 0) {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t s = 0; s < cur.size(); ++s) {
          const double step = wrap_phase(principal_arg(cur[s]) - principal_arg(prev[p][s]));
          const double wgt = options.neighborhood_average ? std::abs(cur[s]) : 1.0;
          num += wgt * step;
          den += wgt;
        }
        const double step = den > 0.0 ? num / den : 0.0;
        sig.displacement[p][t] = sig.displacement[p][t - 1] + inv_gain * step;
      }
      prev[p] = std::move(cur);
    }
  }

  std::vector<double> medians(npx);
  for (std::size_t i = 0; i < npx; ++i) medians[i] = median_inplace(std::span<float>(amp.data() + i * nt, nt));
  const double floor = options.dc_floor ? flat_field_amplitude(video[0], kernel) : 0.0;
  const auto mask = reliability_mask_from_medians(medians, w, h, options.threshold_fraction, floor);

  for (const auto& p : roi.points) {
    sig.reliable.push_back(mask(p));
    sig.median_amplitude.push_back(medians[static_cast<std::size_t>(p.y) * static_cast<std::size_t>(w) +
                                           static_cast<std::size_t>(p.x)]);
  }
  if (sig.reliable_count() == 0)
    throw Error("all ROI points unreliable (phase amplitude too low): check texture or lighting", "estimate");
  return sig;
}

/// Temporal-median amplitude over up to `max_frames` evenly spaced frames.
inline std::vector<double> median_amplitude_map(const VideoSequence& video, const GaborParams& params,
                                                std::size_t max_frames = 64) {
  const GaborKernel kernel = make_kernel(params);
  GaborTransform tf(kernel, video.width(), video.height());
  const std::size_t npx = static_cast<std::size_t>(video.width()) * static_cast<std::size_t>(video.height());
  const std::size_t nt = std::min(video.frame_count(), std::max<std::size_t>(1, max_frames));
  std::vector<float> amp(npx * nt);
  std::vector<cplx> field(npx);
  for (std::size_t k = 0; k < nt; ++k) {
    const std::size_t t = nt == 1 ? 0 : k * (video.frame_count() - 1) / (nt - 1);
    tf.apply(video[t], field);
    for (std::size_t i = 0; i < npx; ++i) amp[i * nt + k] = static_cast<float>(std::abs(field[i]));
  }
  std::vector<double> med(npx);
  for (std::size_t i = 0; i < npx; ++i) med[i] = median_inplace(std::span<float>(amp.data() + i * nt, nt));
  return med;
}

/// Picks up to `count` high-amplitude pixels, at least `min_spacing` apart,
/// keeping `border` pixels clear of the frame edge.
inline RoiSpec auto_roi(const VideoSequence& video, const GaborParams& params, std::size_t count, double min_spacing,
                        int border = 0) {
  const auto med = median_amplitude_map(video, params);
  const int w = video.width();
  const int h = video.height();
  std::vector<std::size_t> order(med.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return med[a] > med[b]; });
  RoiSpec roi{{}, params.theta};
  for (std::size_t idx : order) {
    if (roi.points.size() >= count) break;
    const PixelPoint p{static_cast<int>(idx % static_cast<std::size_t>(w)), static_cast<int>(idx / static_cast<std::size_t>(w))};
    if (p.x < border || p.y < border || p.x >= w - border || p.y >= h - border) continue;
    bool ok = true;
    for (const auto& q : roi.points)
      if (std::hypot(p.x - q.x, p.y - q.y) < min_spacing) {
        ok = false;
        break;
      }
    if (ok) roi.points.push_back(p);
  }
  if (roi.points.empty()) throw Error("no ROI candidates found", "estimate");
  return roi;
}

}  // namespace phasevib
