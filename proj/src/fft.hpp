#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace laserguard::detail {

/// Real-input DFT of fixed size backed by FFTW. Forward output holds the
/// n/2+1 non-negative frequency bins, unnormalized. One instance per thread;
/// plan creation is serialized internally because the FFTW planner is not
/// reentrant.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const noexcept { return n_; }

  /// Input shorter than n is zero-padded.
  std::span<const std::complex<double>> forward(std::span<const double> in);

  /// Inverse of forward(), scaled by 1/n so inverse(forward(x)) == x.
  std::span<const double> inverse(std::span<const std::complex<double>> spectrum);

 private:
  std::size_t n_;
  double* real_ = nullptr;
  std::complex<double>* spec_ = nullptr;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

/// Linear (full) convolution via FFT, output length a.size() + b.size() - 1.
std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b);

std::size_t next_pow2(std::size_t n);

}  // namespace laserguard::detail
