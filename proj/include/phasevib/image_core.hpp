#pragma once

// Grayscale frames, videos, intensity histograms and contrast stretching.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "phasevib/error.hpp"

namespace phasevib {

/// Integer pixel coordinate; x is the column, y the row.
struct PixelPoint {
  int x = 0;
  int y = 0;
  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

/// One grayscale image with intensities normalized to [0,1], row-major.
class Frame {
 public:
  Frame() = default;

  Frame(int width, int height, std::vector<double> intensity, int bit_depth = 8)
      : width_(width), height_(height), bit_depth_(bit_depth), data_(std::move(intensity)) {
    if (width < 1 || height < 1) throw Error("frame dimensions must be at least 1x1", "image");
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
      throw Error("frame buffer size does not match " + std::to_string(width) + "x" +
                      std::to_string(height),
                  "image");
    for (double v : data_)
      if (!(v >= 0.0 && v <= 1.0)) throw Error("frame intensity outside [0,1]", "image");
  }

  static Frame filled(int width, int height, double value, int bit_depth = 8) {
    return Frame(width, height,
                 std::vector<double>(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), value),
                 bit_depth);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int bit_depth() const { return bit_depth_; }
  std::size_t size() const { return data_.size(); }

  double operator()(int x, int y) const {
    return data_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)];
  }

  std::span<const double> pixels() const { return data_; }

  bool contains(PixelPoint p) const { return p.x >= 0 && p.y >= 0 && p.x < width_ && p.y < height_; }

 private:
  int width_ = 0;
  int height_ = 0;
  int bit_depth_ = 8;
  std::vector<double> data_;
};

/// Ordered frames sampled at a fixed rate. Frame k is taken at k / frame_rate_hz.
class VideoSequence {
 public:
  VideoSequence() = default;

  VideoSequence(std::vector<Frame> frames, double frame_rate_hz)
      : frames_(std::move(frames)), frame_rate_hz_(frame_rate_hz) {
    if (!(frame_rate_hz > 0.0)) throw Error("frame rate must be positive", "image");
    if (frames_.empty()) throw Error("video has no frames", "image");
    for (std::size_t k = 1; k < frames_.size(); ++k) {
      if (frames_[k].width() != frames_[0].width() || frames_[k].height() != frames_[0].height())
        throw Error("frame " + std::to_string(k) + " dimensions differ from frame 0", "image");
    }
  }

  std::size_t frame_count() const { return frames_.size(); }
  double frame_rate_hz() const { return frame_rate_hz_; }
  int width() const { return frames_.empty() ? 0 : frames_.front().width(); }
  int height() const { return frames_.empty() ? 0 : frames_.front().height(); }
  double time(std::size_t k) const { return static_cast<double>(k) / frame_rate_hz_; }
  double duration() const { return static_cast<double>(frames_.size()) / frame_rate_hz_; }

  const Frame& operator[](std::size_t k) const { return frames_[k]; }
  const std::vector<Frame>& frames() const { return frames_; }

  auto begin() const { return frames_.begin(); }
  auto end() const { return frames_.end(); }

 private:
  std::vector<Frame> frames_;
  double frame_rate_hz_ = 1.0;
};

/// Uniform-bin histogram over [0,1].
struct IntensityHistogram {
  std::vector<double> bin_edges;  // num_bins + 1 values, 0 .. 1
  std::vector<std::uint64_t> counts;

  std::size_t bins() const { return counts.size(); }
  std::uint64_t total() const {
    std::uint64_t s = 0;
    for (auto c : counts) s += c;
    return s;
  }
};

inline IntensityHistogram histogram(const Frame& frame, int num_bins) {
  if (num_bins < 2) throw Error("histogram needs at least 2 bins", "image");
  IntensityHistogram h;
  h.bin_edges.resize(static_cast<std::size_t>(num_bins) + 1);
  for (int i = 0; i <= num_bins; ++i) h.bin_edges[static_cast<std::size_t>(i)] = static_cast<double>(i) / num_bins;
  h.counts.assign(static_cast<std::size_t>(num_bins), 0);
  for (double v : frame.pixels()) {
    auto bin = static_cast<int>(std::floor(v * num_bins));
    bin = std::clamp(bin, 0, num_bins - 1);
    ++h.counts[static_cast<std::size_t>(bin)];
  }
  return h;
}

/// Linear-interpolated sample quantile (the usual "type 7" definition).
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error("quantile of empty set", "image");
  q = std::clamp(q, 0.0, 1.0);
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
  const double vlo = values[lo];
  if (hi == lo) return vlo;
  const double vhi = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
  return vlo + (pos - static_cast<double>(lo)) * (vhi - vlo);
}

/// Affine intensity map v -> clamp((v - low) / (high - low), 0, 1).
struct IntensityStretch {
  double low = 0.0;
  double high = 1.0;

  bool degenerate() const { return !(high > low); }
  double operator()(double v) const { return std::clamp((v - low) / (high - low), 0.0, 1.0); }

  Frame apply(const Frame& f) const {
    if (degenerate()) return f;
    std::vector<double> out(f.pixels().begin(), f.pixels().end());
    for (double& v : out) v = (*this)(v);
    return Frame(f.width(), f.height(), std::move(out), f.bit_depth());
  }
};

inline void check_quantiles(double low_quantile, double high_quantile) {
  if (!(low_quantile >= 0.0 && low_quantile < high_quantile && high_quantile <= 1.0))
    throw Error("contrast quantiles must satisfy 0 <= low < high <= 1", "enhance");
}

inline IntensityStretch stretch_for(const Frame& frame, double low_quantile, double high_quantile) {
  check_quantiles(low_quantile, high_quantile);
  std::vector<double> v(frame.pixels().begin(), frame.pixels().end());
  return {quantile(v, low_quantile), quantile(v, high_quantile)};
}

struct ContrastResult {
  Frame frame;
  IntensityStretch stretch;
  bool degenerate = false;  // low and high quantile intensities coincided; frame returned unchanged
};

/// Dynamic-range stretch sending the low quantile to 0 and the high quantile to 1.
inline ContrastResult enhance_contrast(const Frame& frame, double low_quantile = 0.01, double high_quantile = 0.99) {
  const auto s = stretch_for(frame, low_quantile, high_quantile);
  if (s.degenerate()) return {frame, s, true};
  return {s.apply(frame), s, false};
}

struct SequenceContrastResult {
  VideoSequence video;
  IntensityStretch stretch;
  bool degenerate = false;
};

/// Stretches every frame with the map derived from the first frame, so all
/// frames see the same monotone affine remap.
inline SequenceContrastResult enhance_sequence(const VideoSequence& video, double low_quantile = 0.01,
                                               double high_quantile = 0.99) {
  const auto s = stretch_for(video[0], low_quantile, high_quantile);
  if (s.degenerate()) return {video, s, true};
  std::vector<Frame> frames;
  frames.reserve(video.frame_count());
  for (const auto& f : video) frames.push_back(s.apply(f));
  return {VideoSequence(std::move(frames), video.frame_rate_hz()), s, false};
}

}  // namespace phasevib
