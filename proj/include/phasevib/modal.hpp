#pragma once

// Resonance picking, operating-deflection-shape extraction from magnified
// video, Modal Assurance Criterion, and the baseline-vs-test damage decision.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "phasevib/error.hpp"
#include "phasevib/image_core.hpp"
#include "phasevib/spectral.hpp"

namespace phasevib {

struct ModePeak {
  double frequency_hz = 0.0;  // parabolic refinement of the peak bin
  double magnitude = 0.0;
  double prominence = 0.0;
};

struct PeakOptions {
  double min_prominence_fraction = 0.05;  // of the global spectral maximum
  double min_separation_hz = 2.0;
  std::size_t max_peaks = 8;
};

/// Topographic prominence of the local maximum at index i.
inline double peak_prominence(std::span<const double> m, std::size_t i) {
  const double h = m[i];
  double left_min = h;
  for (std::size_t j = i; j-- > 0;) {
    if (m[j] > h) break;
    left_min = std::min(left_min, m[j]);
  }
  double right_min = h;
  for (std::size_t j = i + 1; j < m.size(); ++j) {
    if (m[j] > h) break;
    right_min = std::min(right_min, m[j]);
  }
  return h - std::max(left_min, right_min);
}

inline std::vector<ModePeak> pick_peaks(const Spectrum& spec, const PeakOptions& opt = {}) {
  if (!(opt.min_prominence_fraction > 0.0) || !(opt.min_separation_hz > 0.0) || opt.max_peaks == 0)
    throw Error("peak-picking thresholds must be positive", "peaks");
  const auto& m = spec.magnitudes;
  std::vector<ModePeak> out;
  if (m.size() < 3) return out;
  const double global = *std::max_element(m.begin(), m.end());
  if (!(global > 0.0)) return out;

  std::vector<ModePeak> cand;
  for (std::size_t k = 1; k + 1 < m.size(); ++k) {
    if (!(m[k] > m[k - 1] && m[k] >= m[k + 1])) continue;
    const double prom = peak_prominence(m, k);
    if (prom < opt.min_prominence_fraction * global) continue;
    const double den = m[k - 1] - 2.0 * m[k] + m[k + 1];
    const double offset = den != 0.0 ? std::clamp(0.5 * (m[k - 1] - m[k + 1]) / den, -0.5, 0.5) : 0.0;
    cand.push_back({(static_cast<double>(k) + offset) * spec.resolution_hz, m[k], prom});
  }
  std::stable_sort(cand.begin(), cand.end(), [](const ModePeak& a, const ModePeak& b) { return a.magnitude > b.magnitude; });
  const double min_gap = opt.min_separation_hz - 0.5 * spec.resolution_hz;
  for (const auto& c : cand) {
    if (out.size() >= opt.max_peaks) break;
    const bool clear = std::all_of(out.begin(), out.end(),
                                   [&](const ModePeak& a) { return std::abs(a.frequency_hz - c.frequency_hz) >= min_gap; });
    if (clear) out.push_back(c);
  }
  std::sort(out.begin(), out.end(), [](const ModePeak& a, const ModePeak& b) { return a.frequency_hz < b.frequency_hz; });
  return out;
}

// ---------------------------------------------------------------------------
// Deflection shapes

struct DeflectionShape {
  std::vector<double> span_m;        // increasing
  std::vector<double> displacement;  // max |displacement| = 1
  double frequency_hz = 0.0;

  std::size_t sample_count() const { return span_m.size(); }
};

enum class SpanAxis { x, y };

struct ShapeCalibration {
  double structure_length_m = 2.3;
  SpanAxis span_axis = SpanAxis::x;
};

struct ShapeOptions {
  int median_window = 9;            // moving-median window for outlier repair
  double mad_factor = 3.0;          // outliers beyond this many MADs
  double min_edge_contrast = 0.02;  // weakest intensity step accepted as an edge
  double search_radius_px = 8.0;    // edge search window around the rest edge
  double max_missing_fraction = 0.2;
};

struct ShapeExtraction {
  DeflectionShape shape;
  std::vector<int> span_index;        // image column (or row) of each sample
  std::vector<double> rest_edge_px;   // temporal-median edge position
  std::vector<double> deflection_px;  // raw deflection at the selected frame
  std::size_t frame_index = 0;        // frame of maximum total deflection
  std::size_t repaired = 0;           // samples replaced by the local median
};

namespace detail {

inline std::vector<double> moving_median(std::span<const double> v, int window) {
  const int n = static_cast<int>(v.size());
  const int half = std::max(0, window / 2);
  std::vector<double> out(v.size());
  std::vector<double> buf;
  for (int i = 0; i < n; ++i) {
    buf.assign(v.begin() + std::max(0, i - half), v.begin() + std::min(n, i + half + 1));
    auto mid = buf.begin() + static_cast<std::ptrdiff_t>(buf.size() / 2);
    std::nth_element(buf.begin(), mid, buf.end());
    double med = *mid;
    if (buf.size() % 2 == 0) med = 0.5 * (med + *std::max_element(buf.begin(), mid));
    out[static_cast<std::size_t>(i)] = med;
  }
  return out;
}

inline double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double med = *mid;
  if (v.size() % 2 == 0) med = 0.5 * (med + *std::max_element(v.begin(), mid));
  return med;
}

/// Box-smoothed central-difference gradient of a 1D profile.
inline void smoothed_gradient(std::span<const double> profile, int window, std::vector<double>& smooth,
                              std::vector<double>& grad) {
  const int n = static_cast<int>(profile.size());
  const int half = std::max(0, window / 2);
  smooth.assign(profile.size(), 0.0);
  grad.assign(profile.size(), 0.0);
  std::vector<double> prefix(profile.size() + 1, 0.0);
  for (int i = 0; i < n; ++i) prefix[static_cast<std::size_t>(i) + 1] = prefix[static_cast<std::size_t>(i)] + profile[static_cast<std::size_t>(i)];
  for (int i = 0; i < n; ++i) {
    const int a = std::max(0, i - half);
    const int b = std::min(n - 1, i + half);
    smooth[static_cast<std::size_t>(i)] = (prefix[static_cast<std::size_t>(b) + 1] - prefix[static_cast<std::size_t>(a)]) / (b - a + 1);
  }
  for (int i = 1; i + 1 < n; ++i)
    grad[static_cast<std::size_t>(i)] = 0.5 * (smooth[static_cast<std::size_t>(i) + 1] - smooth[static_cast<std::size_t>(i) - 1]);
}

/// Sub-pixel edge inside [lo, hi]: centroid of the positive part of
/// `sign * grad` around its maximum. Exact for a blurred step.
inline double edge_location(const std::vector<double>& grad, double sign, int lo, int hi, int half_width) {
  const int n = static_cast<int>(grad.size());
  lo = std::max(lo, 1);
  hi = std::min(hi, n - 2);
  int best = lo;
  for (int q = lo; q <= hi; ++q)
    if (sign * grad[static_cast<std::size_t>(q)] > sign * grad[static_cast<std::size_t>(best)]) best = q;
  double w = 0.0;
  double wq = 0.0;
  for (int q = std::max(1, best - half_width); q <= std::min(n - 2, best + half_width); ++q) {
    const double g = std::max(0.0, sign * grad[static_cast<std::size_t>(q)]);
    w += g;
    wq += g * q;
  }
  return w > 0.0 ? wq / w : best;
}

}  // namespace detail

/// Quantifies the deflection shape of a single-band magnified video.
///
/// Per span line, the edge is the extremum of the smoothed intensity gradient
/// across the span. The shape is the edge offset from its temporal median in
/// the frame of largest total deflection, outlier-repaired, normalized so the
/// largest-magnitude sample is +1, and calibrated from the detected pixel
/// extent to `structure_length_m`.
inline ShapeExtraction extract_shape(const VideoSequence& video, const ShapeCalibration& calib, int smoothing_window = 5,
                                     const ShapeOptions& opt = {}) {
  if (video.frame_count() < 2) throw Error("shape extraction needs >= 2 frames", "ods");
  if (smoothing_window < 1) throw Error("smoothing window must be >= 1", "ods");
  if (!(calib.structure_length_m > 0.0)) throw Error("structure length must be positive", "ods");
  const bool along_x = calib.span_axis == SpanAxis::x;
  const int nspan = along_x ? video.width() : video.height();
  const int ntr = along_x ? video.height() : video.width();
  const std::size_t nt = video.frame_count();

  auto profile_of = [&](const Frame& f, int s, std::vector<double>& out) {
    out.resize(static_cast<std::size_t>(ntr));
    for (int q = 0; q < ntr; ++q) out[static_cast<std::size_t>(q)] = along_x ? f(s, q) : f(q, s);
  };

  // Edge polarity and anchor come from the temporal-mean image.
  std::vector<double> mean_px(video[0].size(), 0.0);
  for (const auto& f : video) {
    const auto px = f.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) mean_px[i] += px[i];
  }
  for (double& v : mean_px) v /= static_cast<double>(nt);
  const Frame mean_frame(video.width(), video.height(), std::move(mean_px), video[0].bit_depth());

  std::vector<double> prof;
  std::vector<double> smooth;
  std::vector<double> grad;
  std::vector<int> anchor(static_cast<std::size_t>(nspan), 0);
  std::vector<double> polarity(static_cast<std::size_t>(nspan), 0.0);
  std::vector<double> strength(static_cast<std::size_t>(nspan), 0.0);
  for (int s = 0; s < nspan; ++s) {
    profile_of(mean_frame, s, prof);
    detail::smoothed_gradient(prof, smoothing_window, smooth, grad);
    int best = 0;
    for (int q = 1; q < ntr; ++q)
      if (std::abs(grad[static_cast<std::size_t>(q)]) > std::abs(grad[static_cast<std::size_t>(best)])) best = q;
    anchor[static_cast<std::size_t>(s)] = best;
    polarity[static_cast<std::size_t>(s)] = grad[static_cast<std::size_t>(best)] >= 0.0 ? 1.0 : -1.0;
    strength[static_cast<std::size_t>(s)] = std::abs(grad[static_cast<std::size_t>(best)]);
  }
  const double floor = opt.min_edge_contrast / smoothing_window;
  std::vector<unsigned char> detect(static_cast<std::size_t>(nspan), 0);
  int first = -1;
  int last = -1;
  for (int s = 0; s < nspan; ++s) {
    if (strength[static_cast<std::size_t>(s)] >= floor) {
      detect[static_cast<std::size_t>(s)] = 1;
      if (first < 0) first = s;
      last = s;
    }
  }
  if (first < 0 || last - first + 1 < 4)
    throw Error("no detectable edge in the frame: insufficient contrast (try enhance_contrast)", "ods");
  const int extent = last - first + 1;
  int missing = 0;
  for (int s = first; s <= last; ++s) missing += detect[static_cast<std::size_t>(s)] ? 0 : 1;
  if (static_cast<double>(missing) > opt.max_missing_fraction * extent)
    throw Error("no detectable edge in " + std::to_string(100 * missing / extent) +
                    "% of span lines: insufficient contrast (try enhance_contrast)",
                "ods");

  // Edge track per detected span line and frame.
  const auto radius = static_cast<int>(std::ceil(opt.search_radius_px));
  std::vector<std::vector<double>> edge(static_cast<std::size_t>(extent), std::vector<double>(nt, 0.0));
  for (std::size_t t = 0; t < nt; ++t) {
    for (int s = first; s <= last; ++s) {
      if (!detect[static_cast<std::size_t>(s)]) continue;
      profile_of(video[t], s, prof);
      detail::smoothed_gradient(prof, smoothing_window, smooth, grad);
      const int a = anchor[static_cast<std::size_t>(s)];
      edge[static_cast<std::size_t>(s - first)][t] =
          detail::edge_location(grad, polarity[static_cast<std::size_t>(s)], a - radius, a + radius,
                                 smoothing_window / 2 + 2);
    }
  }

  ShapeExtraction out;
  std::vector<double> rest(static_cast<std::size_t>(extent), 0.0);
  for (int i = 0; i < extent; ++i)
    if (detect[static_cast<std::size_t>(first + i)]) rest[static_cast<std::size_t>(i)] = detail::median_of(edge[static_cast<std::size_t>(i)]);

  double best_total = -1.0;
  for (std::size_t t = 0; t < nt; ++t) {
    double total = 0.0;
    for (int i = 0; i < extent; ++i)
      if (detect[static_cast<std::size_t>(first + i)])
        total += std::abs(edge[static_cast<std::size_t>(i)][t] - rest[static_cast<std::size_t>(i)]);
    if (total > best_total) {
      best_total = total;
      out.frame_index = t;
    }
  }

  std::vector<double> d(static_cast<std::size_t>(extent), 0.0);
  for (int i = 0; i < extent; ++i)
    if (detect[static_cast<std::size_t>(first + i)])
      d[static_cast<std::size_t>(i)] = edge[static_cast<std::size_t>(i)][out.frame_index] - rest[static_cast<std::size_t>(i)];
  // Lines without an edge take the local median of their neighbours.
  const auto mm0 = detail::moving_median(d, opt.median_window);
  for (int i = 0; i < extent; ++i)
    if (!detect[static_cast<std::size_t>(first + i)]) d[static_cast<std::size_t>(i)] = mm0[static_cast<std::size_t>(i)];
  out.deflection_px = d;

  const auto mm = detail::moving_median(d, opt.median_window);
  std::vector<double> resid(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) resid[i] = d[i] - mm[i];
  const double rmed = detail::median_of(resid);
  std::vector<double> dev(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) dev[i] = std::abs(resid[i] - rmed);
  const double mad = detail::median_of(dev);
  double dmax = 0.0;
  for (double v : d) dmax = std::max(dmax, std::abs(v));
  const double tiny = 1e-9 * dmax;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (std::abs(resid[i] - rmed) > opt.mad_factor * mad && std::abs(resid[i] - rmed) > tiny) {
      d[i] = mm[i];
      ++out.repaired;
    }
  }

  std::size_t imax = 0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (std::abs(d[i]) > std::abs(d[imax])) imax = i;
  if (d[imax] == 0.0) throw Error("no deflection found in magnified video", "ods");
  const double norm = d[imax];

  for (int i = 0; i < extent; ++i) {
    out.span_index.push_back(first + i);
    out.rest_edge_px.push_back(rest[static_cast<std::size_t>(i)]);
    out.shape.span_m.push_back(calib.structure_length_m * i / (extent - 1));
    out.shape.displacement.push_back(d[static_cast<std::size_t>(i)] / norm);
  }
  out.shape.displacement[imax] = 1.0;
  return out;
}

/// Linear interpolation of `shape` at span positions `grid` (clamped at the ends).
inline std::vector<double> resample(const DeflectionShape& shape, std::span<const double> grid) {
  if (shape.span_m.size() != shape.displacement.size() || shape.span_m.empty())
    throw Error("malformed deflection shape", "mac");
  std::vector<double> out;
  out.reserve(grid.size());
  const auto& xs = shape.span_m;
  for (double g : grid) {
    if (g <= xs.front()) {
      out.push_back(shape.displacement.front());
      continue;
    }
    if (g >= xs.back()) {
      out.push_back(shape.displacement.back());
      continue;
    }
    const auto it = std::upper_bound(xs.begin(), xs.end(), g);
    const auto j = static_cast<std::size_t>(it - xs.begin());
    const double t = (g - xs[j - 1]) / (xs[j] - xs[j - 1]);
    out.push_back(shape.displacement[j - 1] + t * (shape.displacement[j] - shape.displacement[j - 1]));
  }
  return out;
}

/// |<a,b>|^2 / (<a,a> <b,b>) for two equally sampled real vectors.
inline double mac(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw Error("MAC vectors must have equal, non-zero length", "mac");
  const double ab = std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
  const double aa = std::inner_product(a.begin(), a.end(), a.begin(), 0.0);
  const double bb = std::inner_product(b.begin(), b.end(), b.begin(), 0.0);
  if (!(aa > 0.0) || !(bb > 0.0)) throw Error("MAC of a zero-norm shape", "mac");
  return std::clamp(ab * ab / (aa * bb), 0.0, 1.0);
}

/// MAC after resampling both shapes onto a common uniform grid covering their
/// shared span range.
inline double mac(const DeflectionShape& a, const DeflectionShape& b) {
  if (a.span_m.size() < 2 || b.span_m.size() < 2) throw Error("shapes need >= 2 samples", "mac");
  if (a.span_m == b.span_m) return mac(std::span<const double>(a.displacement), std::span<const double>(b.displacement));
  const double lo = std::max(a.span_m.front(), b.span_m.front());
  const double hi = std::min(a.span_m.back(), b.span_m.back());
  if (!(hi > lo)) throw Error("shapes do not overlap in span", "mac");
  const std::size_t n = std::max(a.span_m.size(), b.span_m.size());
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  const auto ra = resample(a, grid);
  const auto rb = resample(b, grid);
  return mac(std::span<const double>(ra), std::span<const double>(rb));
}

/// Number of sign changes, ignoring samples with |v| <= tolerance.
inline int count_nodes(std::span<const double> v, double tolerance = 0.05) {
  int nodes = 0;
  double last = 0.0;
  for (double x : v) {
    if (std::abs(x) <= tolerance) continue;
    if (last != 0.0 && (x > 0.0) != (last > 0.0)) ++nodes;
    last = x;
  }
  return nodes;
}

// ---------------------------------------------------------------------------
// Damage decision

struct DamageFeatures {
  std::vector<ModePeak> peaks;
  std::vector<DeflectionShape> shapes;  // empty, or one per peak
};

struct DamageThresholds {
  double freq_threshold_hz = 0.6;
  double mac_threshold = 0.85;
};

enum class Verdict { baseline_consistent, damage_indicated };

inline const char* to_string(Verdict v) {
  return v == Verdict::damage_indicated ? "damage-indicated" : "baseline-consistent";
}

struct DamageReport {
  std::vector<double> baseline_hz;
  std::vector<double> test_hz;
  std::vector<double> frequency_shift_hz;  // test - baseline, paired by order
  std::vector<double> mac;                 // empty when no shapes were supplied
  Verdict verdict = Verdict::baseline_consistent;
  DamageThresholds thresholds;
};

inline DamageReport detect_damage(const DamageFeatures& baseline, const DamageFeatures& test,
                                  const DamageThresholds& thr = {}) {
  if (baseline.peaks.size() != test.peaks.size())
    throw Error("mode-count mismatch: baseline has " + std::to_string(baseline.peaks.size()) + ", test has " +
                    std::to_string(test.peaks.size()),
                "damage");
  const bool with_shapes = !baseline.shapes.empty() || !test.shapes.empty();
  if (with_shapes && (baseline.shapes.size() != baseline.peaks.size() || test.shapes.size() != test.peaks.size()))
    throw Error("shape count does not match mode count", "damage");

  DamageReport r;
  r.thresholds = thr;
  bool damaged = false;
  for (std::size_t i = 0; i < baseline.peaks.size(); ++i) {
    const double fb = baseline.peaks[i].frequency_hz;
    const double ft = test.peaks[i].frequency_hz;
    r.baseline_hz.push_back(fb);
    r.test_hz.push_back(ft);
    r.frequency_shift_hz.push_back(ft - fb);
    if (std::abs(ft - fb) > thr.freq_threshold_hz) damaged = true;
    if (with_shapes) {
      const double m = mac(baseline.shapes[i], test.shapes[i]);
      r.mac.push_back(m);
      if (m < thr.mac_threshold) damaged = true;
    }
  }
  r.verdict = damaged ? Verdict::damage_indicated : Verdict::baseline_consistent;
  return r;
}

}  // namespace phasevib
