#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "laserguard/audio.hpp"

namespace laserguard::dwt {

enum class Family { Haar, Daubechies4 };
enum class Boundary { Symmetric, ZeroPad };

std::string to_string(Family f);
std::string to_string(Boundary b);
Family parse_family(const std::string& name);
Boundary parse_boundary(const std::string& name);

struct WaveletSpec {
  Family family = Family::Daubechies4;
  int level = 5;
  Boundary boundary = Boundary::Symmetric;
  /// When a signal is shorter than 2^level, decompose at floor(log2(len))
  /// instead of failing with SignalTooShort.
  bool clamp_short_signals = true;

  void validate() const;
};

/// Orthonormal two-channel filter bank. Analysis is
///   a[o] = sum_j lo[j] * x[2o + 1 - j],   d[o] = sum_j hi[j] * x[2o + 1 - j]
/// and synthesis is its adjoint.
struct FilterBank {
  std::vector<double> lo;
  std::vector<double> hi;
  std::size_t length() const noexcept { return lo.size(); }
};

const FilterBank& filter_bank(Family family);

struct WaveletDecomposition {
  std::vector<double> approx;                ///< CA_n
  std::vector<std::vector<double>> details;  ///< CD_n, ..., CD_1
  WaveletSpec spec;                          ///< spec.level is the level actually used
  int requested_level = 0;

  int level() const noexcept { return static_cast<int>(details.size()); }
  bool clamped() const noexcept { return level() < requested_level; }
};

/// Coefficient count of one analysis step on a signal of length n.
std::size_t coeff_length(std::size_t n, std::size_t filter_length);

/// floor(log2(n)); 0 for n < 2.
int max_level(std::size_t n);

struct LevelCoefficients {
  std::vector<double> approx;
  std::vector<double> detail;
};

LevelCoefficients analysis_step(std::span<const double> x, const FilterBank& bank, Boundary boundary);

/// Reconstructs `out_len` samples from one level of coefficients.
std::vector<double> synthesis_step(std::span<const double> approx, std::span<const double> detail,
                                   const FilterBank& bank, std::size_t out_len);

WaveletDecomposition dwt_multilevel(std::span<const double> x, const WaveletSpec& spec);
WaveletDecomposition dwt_multilevel(const audio::AudioBuffer& buf, const WaveletSpec& spec);

/// Throws InconsistentShapes when array lengths do not match the cascade
/// implied by original_len and the filter length.
std::vector<double> idwt_multilevel(const WaveletDecomposition& dec, std::size_t original_len);

}  // namespace laserguard::dwt
