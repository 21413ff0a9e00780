#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

namespace laserguard::detail {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  std::lock_guard lock(planner_mutex());
  real_ = static_cast<double*>(fftw_malloc(sizeof(double) * n_));
  spec_ = static_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * (n_ / 2 + 1)));
  auto* spec = reinterpret_cast<fftw_complex*>(spec_);
  forward_plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), real_, spec, FFTW_ESTIMATE);
  inverse_plan_ = fftw_plan_dft_c2r_1d(static_cast<int>(n_), spec, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
  fftw_free(real_);
  fftw_free(spec_);
}

std::span<const std::complex<double>> RealFft::forward(std::span<const double> in) {
  const std::size_t m = std::min(in.size(), n_);
  std::copy_n(in.begin(), m, real_);
  std::fill(real_ + m, real_ + n_, 0.0);
  fftw_execute(static_cast<fftw_plan>(forward_plan_));
  return {spec_, n_ / 2 + 1};
}

std::span<const double> RealFft::inverse(std::span<const std::complex<double>> spectrum) {
  std::copy_n(spectrum.begin(), std::min(spectrum.size(), n_ / 2 + 1), spec_);
  // c2r destroys its input, which is our own buffer.
  fftw_execute(static_cast<fftw_plan>(inverse_plan_));
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < n_; ++i) real_[i] *= scale;
  return {real_, n_};
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t n = next_pow2(out_len);
  RealFft fft(n);
  const auto fa = fft.forward(a);
  std::vector<std::complex<double>> prod(fa.begin(), fa.end());
  const auto fb = fft.forward(b);
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] *= fb[i];
  const auto y = fft.inverse(prod);
  return {y.begin(), y.begin() + static_cast<std::ptrdiff_t>(out_len)};
}

}  // namespace laserguard::detail
