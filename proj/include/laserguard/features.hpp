#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "laserguard/audio.hpp"
#include "laserguard/dwt.hpp"
#include "laserguard/matrix.hpp"

namespace laserguard::features {

enum class Scheme { DWT, MFCC, LFCC, CQCC };

std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& name);

struct FeatureVector {
  Scheme scheme = Scheme::DWT;
  std::vector<double> values;
  std::size_t dim() const noexcept { return values.size(); }
};

struct CepstralConfig {
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  std::size_t fft_size = 512;
  std::size_t n_filters = 26;
  std::size_t n_coeffs = 20;
  std::size_t cqt_bins_per_octave = 96;
  std::size_t cqt_octaves = 9;
  std::size_t cqcc_resample_period = 16;

  /// Throws InvalidArgument on inconsistent settings for this sample rate.
  void validate(int sample_rate) const;
  std::size_t frame_samples(int sample_rate) const;
  std::size_t hop_samples(int sample_rate) const;
};

/// Number of full analysis frames: floor((n - frame) / hop) + 1, or 0.
std::size_t frame_count(std::size_t n_samples, std::size_t frame, std::size_t hop);

/// Everything needed to turn a clip into a clip-level vector.
struct FeatureConfig {
  Scheme scheme = Scheme::DWT;
  dwt::WaveletSpec wavelet;
  CepstralConfig cepstral;

  /// Dimension every vector of this config will have.
  std::size_t dim() const;
};

// -- proposed front-end -----------------------------------------------------

/// [var, skew, kurt] of CA_n, then of CD_n ... CD_1. Always 3(n+1) long:
/// clips too short for the requested level are decomposed at the clamped
/// level and zero-padded.
FeatureVector dwt_moment_features(const audio::AudioBuffer& buf, const dwt::WaveletSpec& spec);

// -- cepstral baselines ------------------------------------------------------

enum class FilterScale { Mel, Linear };

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular filterbank over the fft_size/2+1 bins from 0 Hz to Nyquist.
struct Filterbank {
  std::vector<double> centers_hz;
  Matrix weights;  ///< n_filters x (fft_size/2 + 1)
};

Filterbank make_filterbank(FilterScale scale, const CepstralConfig& cfg, int sample_rate);

/// Per-frame log filterbank energies (floored at 1e-10 before the log).
Matrix log_filterbank(const audio::AudioBuffer& buf, const CepstralConfig& cfg, FilterScale scale);

/// Orthonormal DCT-II of `in`, first `n_out` coefficients.
std::vector<double> dct2(std::span<const double> in, std::size_t n_out);

Matrix mfcc(const audio::AudioBuffer& buf, const CepstralConfig& cfg);
Matrix lfcc(const audio::AudioBuffer& buf, const CepstralConfig& cfg);

/// Geometric CQT center frequencies, f_min = Nyquist / 2^octaves.
std::vector<double> cqt_center_frequencies(const CepstralConfig& cfg, int sample_rate);

/// |CQT| per frame (frames x bins), frames aligned with the MFCC framing.
Matrix cqt_magnitudes(const audio::AudioBuffer& buf, const CepstralConfig& cfg);

Matrix cqcc(const audio::AudioBuffer& buf, const CepstralConfig& cfg);

/// Clip-level vector: per-coefficient mean followed by population std.
FeatureVector aggregate_frames(const Matrix& frames, Scheme scheme);

// -- dispatch ----------------------------------------------------------------

FeatureVector featurize(const audio::AudioBuffer& buf, const FeatureConfig& cfg);

// -- spectrum export ---------------------------------------------------------

struct Spectrum {
  std::vector<double> freq_hz;
  std::vector<double> magnitude_db;
};

/// Welch-averaged spectrum (Hann, 50% overlap, `segment` samples per
/// segment, shortened for short clips), as power spectral density in dB.
Spectrum log_spectrum(const audio::AudioBuffer& buf, std::size_t segment = 1024);

/// Mean of the dB values with lo <= f < hi.
double band_mean_db(const Spectrum& s, double lo_hz, double hi_hz);

/// Total power with lo <= f < hi, in dB.
double band_energy_db(const Spectrum& s, double lo_hz, double hi_hz);

}  // namespace laserguard::features
