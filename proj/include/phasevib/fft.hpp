#pragma once

// Thin RAII layer over FFTW3 (double precision).
//
// All plans use FFTW_ESTIMATE: plan selection is then a pure function of the
// transform size, which keeps results bit-reproducible between runs.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "phasevib/error.hpp"

namespace phasevib::fft {

using cplx = std::complex<double>;

namespace detail {

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

struct PlanDestroy {
  void operator()(fftw_plan_s* p) const noexcept { fftw_destroy_plan(p); }
};

using PlanHandle = std::unique_ptr<fftw_plan_s, PlanDestroy>;

template <typename T>
std::unique_ptr<T[], FftwFree> aligned(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * (n == 0 ? 1 : n)));
  if (p == nullptr) throw Error("fftw_malloc failed", "fft");
  return std::unique_ptr<T[], FftwFree>(p);
}

}  // namespace detail

/// Smallest n' >= n whose prime factors are all in {2,3,5,7}.
inline int good_size(int n) {
  for (int m = n < 1 ? 1 : n;; ++m) {
    int r = m;
    for (int p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

/// In-place 2D complex transform pair on a fixed rows x cols buffer.
class Complex2d {
 public:
  Complex2d(int rows, int cols)
      : rows_(rows), cols_(cols), buf_(detail::aligned<fftw_complex>(size())) {
    forward_.reset(fftw_plan_dft_2d(rows, cols, buf_.get(), buf_.get(), FFTW_FORWARD, FFTW_ESTIMATE));
    backward_.reset(fftw_plan_dft_2d(rows, cols, buf_.get(), buf_.get(), FFTW_BACKWARD, FFTW_ESTIMATE));
    if (!forward_ || !backward_) throw Error("failed to create 2D FFT plan", "fft");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_); }

  /// Working buffer, row-major.
  std::span<cplx> data() { return {reinterpret_cast<cplx*>(buf_.get()), size()}; }

  void forward() { fftw_execute(forward_.get()); }

  /// Unnormalized inverse; divide by size() to undo forward().
  void backward() { fftw_execute(backward_.get()); }

 private:
  int rows_;
  int cols_;
  std::unique_ptr<fftw_complex[], detail::FftwFree> buf_;
  detail::PlanHandle forward_;
  detail::PlanHandle backward_;
};

/// Real <-> half-complex 1D transform pair of length n.
class Real1d {
 public:
  explicit Real1d(int n)
      : n_(n), real_(detail::aligned<double>(static_cast<std::size_t>(n))),
        spec_(detail::aligned<fftw_complex>(static_cast<std::size_t>(n / 2 + 1))) {
    if (n < 1) throw Error("FFT length must be positive", "fft");
    forward_.reset(fftw_plan_dft_r2c_1d(n, real_.get(), spec_.get(), FFTW_ESTIMATE));
    backward_.reset(fftw_plan_dft_c2r_1d(n, spec_.get(), real_.get(), FFTW_ESTIMATE));
    if (!forward_ || !backward_) throw Error("failed to create 1D FFT plan", "fft");
  }

  int size() const { return n_; }
  int bins() const { return n_ / 2 + 1; }

  std::span<double> real() { return {real_.get(), static_cast<std::size_t>(n_)}; }
  std::span<cplx> spectrum() {
    return {reinterpret_cast<cplx*>(spec_.get()), static_cast<std::size_t>(bins())};
  }

  void forward() { fftw_execute(forward_.get()); }

  /// Unnormalized inverse (c2r clobbers the spectrum buffer).
  void backward() { fftw_execute(backward_.get()); }

 private:
  int n_;
  std::unique_ptr<double[], detail::FftwFree> real_;
  std::unique_ptr<fftw_complex[], detail::FftwFree> spec_;
  detail::PlanHandle forward_;
  detail::PlanHandle backward_;
};

}  // namespace phasevib::fft
