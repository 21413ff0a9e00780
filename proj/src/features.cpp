#include "laserguard/features.hpp"

#include <algorithm>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <cmath>
#include <complex>
#include <numbers>

#include "fft.hpp"
#include "laserguard/error.hpp"
#include "laserguard/stats.hpp"

namespace laserguard::features {

namespace {

constexpr double kEnergyFloor = 1e-10;

/// Orthonormal DCT-II basis, n_out rows over n_in samples.
class DctBasis {
 public:
  DctBasis(std::size_t n_in, std::size_t n_out) : n_in_(n_in), n_out_(n_out), basis_(n_out * n_in) {
    const double s0 = std::sqrt(1.0 / static_cast<double>(n_in));
    const double sk = std::sqrt(2.0 / static_cast<double>(n_in));
    for (std::size_t k = 0; k < n_out; ++k) {
      for (std::size_t n = 0; n < n_in; ++n) {
        basis_[k * n_in + n] =
            (k == 0 ? s0 : sk) *
            std::cos(std::numbers::pi * static_cast<double>(k) * (2.0 * static_cast<double>(n) + 1.0) /
                     (2.0 * static_cast<double>(n_in)));
      }
    }
  }

  void apply(std::span<const double> in, std::span<double> out) const {
    for (std::size_t k = 0; k < n_out_; ++k) {
      const double* b = basis_.data() + k * n_in_;
      double acc = 0.0;
      for (std::size_t n = 0; n < n_in_; ++n) acc += b[n] * in[n];
      out[k] = acc;
    }
  }

 private:
  std::size_t n_in_;
  std::size_t n_out_;
  std::vector<double> basis_;
};

std::vector<double> hamming(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  return w;
}

Matrix cepstra(const audio::AudioBuffer& buf, const CepstralConfig& cfg, FilterScale scale) {
  const Matrix logfb = log_filterbank(buf, cfg, scale);
  const DctBasis dct(cfg.n_filters, cfg.n_coeffs);
  Matrix out(logfb.rows(), cfg.n_coeffs);
  for (std::size_t f = 0; f < logfb.rows(); ++f) dct.apply(logfb.row(f), out.row(f));
  return out;
}

std::size_t require_frames(const audio::AudioBuffer& buf, const CepstralConfig& cfg) {
  cfg.validate(buf.sample_rate());
  const std::size_t frame = cfg.frame_samples(buf.sample_rate());
  if (buf.size() < frame) {
    throw Error(ErrorCode::ClipTooShort, std::to_string(buf.size()) + " samples is shorter than one " +
                                             std::to_string(frame) + "-sample frame");
  }
  return frame_count(buf.size(), frame, cfg.hop_samples(buf.sample_rate()));
}

// ---------------------------------------------------------------------------
// Constant-Q transform by direct kernels.
//
// Each octave is evaluated on a copy of the signal decimated so that the
// octave's top edge sits at or below a quarter of the working rate; the top
// two octaves use the input rate. Kernels are Hann-windowed complex
// exponentials of length Q * rate / f_k, normalized to unit window sum, and
// centered on the analysis frame centers. Samples outside the clip are zero.

std::vector<double> halfband_lowpass() {
  constexpr int kHalf = 23;
  std::vector<double> h(2 * kHalf + 1);
  double sum = 0.0;
  for (int n = -kHalf; n <= kHalf; ++n) {
    const double x = 0.5 * n;
    const double sinc = n == 0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
    const double t = static_cast<double>(n + kHalf) / (2.0 * kHalf);
    const double blackman =
        0.42 - 0.5 * std::cos(2.0 * std::numbers::pi * t) + 0.08 * std::cos(4.0 * std::numbers::pi * t);
    h[static_cast<std::size_t>(n + kHalf)] = 0.5 * sinc * blackman;
    sum += h[static_cast<std::size_t>(n + kHalf)];
  }
  for (double& v : h) v /= sum;
  return h;
}

std::vector<double> decimate2(std::span<const double> x, std::span<const double> h) {
  const auto half = static_cast<long long>(h.size() / 2);
  const auto n = static_cast<long long>(x.size());
  std::vector<double> y(static_cast<std::size_t>((n + 1) / 2));
  for (long long i = 0; i < static_cast<long long>(y.size()); ++i) {
    double acc = 0.0;
    for (long long k = -half; k <= half; ++k) {
      const long long idx = 2 * i - k;
      if (idx >= 0 && idx < n) acc += h[static_cast<std::size_t>(k + half)] * x[static_cast<std::size_t>(idx)];
    }
    y[static_cast<std::size_t>(i)] = acc;
  }
  return y;
}

struct CqtKernel {
  int level = 0;
  long long half = 0;
  std::vector<std::complex<double>> taps;
};

struct CqtPlan {
  std::vector<double> freqs;
  std::vector<CqtKernel> kernels;
  int levels = 1;
};

CqtPlan make_cqt_plan(const CepstralConfig& cfg, int sample_rate) {
  CqtPlan plan;
  plan.freqs = cqt_center_frequencies(cfg, sample_rate);
  const std::size_t bins = plan.freqs.size();
  const auto per_octave = static_cast<double>(cfg.cqt_bins_per_octave);
  const double q = 1.0 / (std::pow(2.0, 1.0 / per_octave) - 1.0);
  plan.kernels.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    const auto octave_from_top = static_cast<int>((bins - 1 - k) / cfg.cqt_bins_per_octave);
    CqtKernel& ker = plan.kernels[k];
    ker.level = std::max(0, octave_from_top - 1);
    plan.levels = std::max(plan.levels, ker.level + 1);
    const double rate = sample_rate / std::pow(2.0, ker.level);
    ker.half = std::max<long long>(1, std::llround(q * rate / plan.freqs[k] / 2.0));
    const std::size_t len = static_cast<std::size_t>(2 * ker.half + 1);
    ker.taps.resize(len);
    double wsum = 0.0;
    for (long long n = -ker.half; n <= ker.half; ++n) {
      const double w = 0.5 + 0.5 * std::cos(std::numbers::pi * static_cast<double>(n) / static_cast<double>(ker.half + 1));
      const double phase = -2.0 * std::numbers::pi * plan.freqs[k] * static_cast<double>(n) / rate;
      ker.taps[static_cast<std::size_t>(n + ker.half)] = w * std::polar(1.0, phase);
      wsum += w;
    }
    for (auto& t : ker.taps) t /= wsum;
  }
  return plan;
}

}  // namespace

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::DWT: return "dwt";
    case Scheme::MFCC: return "mfcc";
    case Scheme::LFCC: return "lfcc";
    case Scheme::CQCC: return "cqcc";
  }
  return "dwt";
}

Scheme parse_scheme(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "dwt") return Scheme::DWT;
  if (lower == "mfcc") return Scheme::MFCC;
  if (lower == "lfcc") return Scheme::LFCC;
  if (lower == "cqcc") return Scheme::CQCC;
  throw Error(ErrorCode::InvalidArgument, "unknown feature scheme '" + name + "'");
}

void CepstralConfig::validate(int sample_rate) const {
  if (sample_rate <= 0) throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
  if (!(hop_ms > 0.0) || !(frame_ms > hop_ms)) {
    throw Error(ErrorCode::InvalidArgument, "need frame_ms > hop_ms > 0");
  }
  if (hop_samples(sample_rate) == 0) throw Error(ErrorCode::InvalidArgument, "hop is shorter than one sample");
  if (fft_size < frame_samples(sample_rate)) {
    throw Error(ErrorCode::InvalidArgument, "fft_size is smaller than the frame");
  }
  if (n_filters == 0 || n_coeffs == 0 || n_coeffs > n_filters) {
    throw Error(ErrorCode::InvalidArgument, "need 0 < n_coeffs <= n_filters");
  }
  if (cqt_bins_per_octave == 0 || cqt_octaves == 0 || cqcc_resample_period == 0) {
    throw Error(ErrorCode::InvalidArgument, "CQT parameters must be positive");
  }
}

std::size_t CepstralConfig::frame_samples(int sample_rate) const {
  return static_cast<std::size_t>(std::llround(frame_ms * sample_rate / 1000.0));
}

std::size_t CepstralConfig::hop_samples(int sample_rate) const {
  return static_cast<std::size_t>(std::llround(hop_ms * sample_rate / 1000.0));
}

std::size_t frame_count(std::size_t n_samples, std::size_t frame, std::size_t hop) {
  if (hop == 0 || n_samples < frame) return 0;
  return (n_samples - frame) / hop + 1;
}

std::size_t FeatureConfig::dim() const {
  if (scheme == Scheme::DWT) return 3 * static_cast<std::size_t>(wavelet.level + 1);
  return 2 * cepstral.n_coeffs;
}

FeatureVector dwt_moment_features(const audio::AudioBuffer& buf, const dwt::WaveletSpec& spec) {
  const auto dec = dwt::dwt_multilevel(buf, spec);
  FeatureVector fv;
  fv.scheme = Scheme::DWT;
  fv.values.reserve(3 * static_cast<std::size_t>(spec.level + 1));
  auto push = [&](std::span<const double> band) {
    const auto m = stats::moments(band);
    fv.values.insert(fv.values.end(), {m.variance, m.skew, m.kurtosis});
  };
  push(dec.approx);
  for (const auto& d : dec.details) push(d);
  fv.values.resize(3 * static_cast<std::size_t>(spec.level + 1), 0.0);
  return fv;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Filterbank make_filterbank(FilterScale scale, const CepstralConfig& cfg, int sample_rate) {
  cfg.validate(sample_rate);
  const double nyquist = sample_rate / 2.0;
  const std::size_t n_edges = cfg.n_filters + 2;
  std::vector<double> edges(n_edges);
  for (std::size_t i = 0; i < n_edges; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n_edges - 1);
    edges[i] = scale == FilterScale::Mel ? mel_to_hz(t * hz_to_mel(nyquist)) : t * nyquist;
  }

  const std::size_t n_bins = cfg.fft_size / 2 + 1;
  Filterbank fb{std::vector<double>(edges.begin() + 1, edges.end() - 1), Matrix(cfg.n_filters, n_bins)};
  for (std::size_t m = 0; m < cfg.n_filters; ++m) {
    const double lo = edges[m];
    const double mid = edges[m + 1];
    const double hi = edges[m + 2];
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / static_cast<double>(cfg.fft_size);
      double w = 0.0;
      if (f > lo && f <= mid) {
        w = (f - lo) / (mid - lo);
      } else if (f > mid && f < hi) {
        w = (hi - f) / (hi - mid);
      }
      fb.weights(m, k) = w;
    }
  }
  return fb;
}

Matrix log_filterbank(const audio::AudioBuffer& buf, const CepstralConfig& cfg, FilterScale scale) {
  const std::size_t n_frames = require_frames(buf, cfg);
  const int fs = buf.sample_rate();
  const std::size_t frame = cfg.frame_samples(fs);
  const std::size_t hop = cfg.hop_samples(fs);
  const Filterbank fb = make_filterbank(scale, cfg, fs);
  const auto window = hamming(frame);
  const std::size_t n_bins = cfg.fft_size / 2 + 1;

  detail::RealFft fft(cfg.fft_size);
  std::vector<double> windowed(frame);
  std::vector<double> power(n_bins);
  Matrix out(n_frames, cfg.n_filters);
  const auto x = buf.samples();
  for (std::size_t f = 0; f < n_frames; ++f) {
    for (std::size_t i = 0; i < frame; ++i) windowed[i] = x[f * hop + i] * window[i];
    const auto spec = fft.forward(windowed);
    for (std::size_t k = 0; k < n_bins; ++k) power[k] = std::norm(spec[k]);
    for (std::size_t m = 0; m < cfg.n_filters; ++m) {
      const auto w = fb.weights.row(m);
      double e = 0.0;
      for (std::size_t k = 0; k < n_bins; ++k) e += w[k] * power[k];
      out(f, m) = std::log(std::max(e, kEnergyFloor));
    }
  }
  return out;
}

std::vector<double> dct2(std::span<const double> in, std::size_t n_out) {
  std::vector<double> out(n_out);
  DctBasis(in.size(), n_out).apply(in, out);
  return out;
}

Matrix mfcc(const audio::AudioBuffer& buf, const CepstralConfig& cfg) {
  return cepstra(buf, cfg, FilterScale::Mel);
}

Matrix lfcc(const audio::AudioBuffer& buf, const CepstralConfig& cfg) {
  return cepstra(buf, cfg, FilterScale::Linear);
}

std::vector<double> cqt_center_frequencies(const CepstralConfig& cfg, int sample_rate) {
  const double fmin = (sample_rate / 2.0) / std::pow(2.0, static_cast<double>(cfg.cqt_octaves));
  const std::size_t bins = cfg.cqt_bins_per_octave * cfg.cqt_octaves;
  std::vector<double> f(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    f[k] = fmin * std::pow(2.0, static_cast<double>(k) / static_cast<double>(cfg.cqt_bins_per_octave));
  }
  return f;
}

Matrix cqt_magnitudes(const audio::AudioBuffer& buf, const CepstralConfig& cfg) {
  const std::size_t n_frames = require_frames(buf, cfg);
  const int fs = buf.sample_rate();
  const std::size_t frame = cfg.frame_samples(fs);
  const std::size_t hop = cfg.hop_samples(fs);
  const CqtPlan plan = make_cqt_plan(cfg, fs);

  const auto lowpass = halfband_lowpass();
  std::vector<std::vector<double>> signal(static_cast<std::size_t>(plan.levels));
  signal[0].assign(buf.samples().begin(), buf.samples().end());
  for (std::size_t l = 1; l < signal.size(); ++l) signal[l] = decimate2(signal[l - 1], lowpass);

  Matrix out(n_frames, plan.freqs.size());
  for (std::size_t f = 0; f < n_frames; ++f) {
    const long long center = static_cast<long long>(f * hop + frame / 2);
    for (std::size_t k = 0; k < plan.kernels.size(); ++k) {
      const CqtKernel& ker = plan.kernels[k];
      const auto& x = signal[static_cast<std::size_t>(ker.level)];
      const long long c = ker.level == 0 ? center : (center + (1LL << (ker.level - 1))) >> ker.level;
      const long long first = std::max(-ker.half, -c);
      const long long last = std::min(ker.half, static_cast<long long>(x.size()) - 1 - c);
      std::complex<double> acc = 0.0;
      for (long long n = first; n <= last; ++n) {
        acc += x[static_cast<std::size_t>(c + n)] * ker.taps[static_cast<std::size_t>(n + ker.half)];
      }
      out(f, k) = std::abs(acc);
    }
  }
  return out;
}

Matrix cqcc(const audio::AudioBuffer& buf, const CepstralConfig& cfg) {
  const Matrix mags = cqt_magnitudes(buf, cfg);
  const auto freqs = cqt_center_frequencies(cfg, buf.sample_rate());
  const double fmin = freqs.front();
  const double step_hz = fmin / static_cast<double>(cfg.cqcc_resample_period);
  const auto per_octave = static_cast<double>(cfg.cqt_bins_per_octave);

  // Uniform linear-frequency grid expressed as fractional CQT bin positions.
  std::vector<double> positions;
  for (double f = fmin; f <= freqs.back(); f += step_hz) positions.push_back(per_octave * std::log2(f / fmin));

  const DctBasis dct(positions.size(), cfg.n_coeffs);
  std::vector<double> log_power(freqs.size());
  std::vector<double> linear(positions.size());
  Matrix out(mags.rows(), cfg.n_coeffs);
  for (std::size_t f = 0; f < mags.rows(); ++f) {
    const auto row = mags.row(f);
    for (std::size_t k = 0; k < row.size(); ++k) log_power[k] = std::log(std::max(row[k] * row[k], kEnergyFloor));
    boost::math::interpolators::cardinal_cubic_b_spline<double> spline(log_power.data(), log_power.size(), 0.0, 1.0);
    for (std::size_t j = 0; j < positions.size(); ++j) linear[j] = spline(positions[j]);
    dct.apply(linear, out.row(f));
  }
  return out;
}

FeatureVector aggregate_frames(const Matrix& frames, Scheme scheme) {
  if (frames.rows() == 0) throw Error(ErrorCode::EmptyFrames, "no frames to aggregate");
  const std::size_t d = frames.cols();
  const double n = static_cast<double>(frames.rows());
  FeatureVector fv;
  fv.scheme = scheme;
  fv.values.assign(2 * d, 0.0);
  for (std::size_t r = 0; r < frames.rows(); ++r) {
    for (std::size_t c = 0; c < d; ++c) fv.values[c] += frames(r, c);
  }
  for (std::size_t c = 0; c < d; ++c) fv.values[c] /= n;
  for (std::size_t r = 0; r < frames.rows(); ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const double dev = frames(r, c) - fv.values[c];
      fv.values[d + c] += dev * dev;
    }
  }
  for (std::size_t c = 0; c < d; ++c) fv.values[d + c] = std::sqrt(fv.values[d + c] / n);
  return fv;
}

FeatureVector featurize(const audio::AudioBuffer& buf, const FeatureConfig& cfg) {
  switch (cfg.scheme) {
    case Scheme::DWT: return dwt_moment_features(buf, cfg.wavelet);
    case Scheme::MFCC: return aggregate_frames(mfcc(buf, cfg.cepstral), Scheme::MFCC);
    case Scheme::LFCC: return aggregate_frames(lfcc(buf, cfg.cepstral), Scheme::LFCC);
    case Scheme::CQCC: return aggregate_frames(cqcc(buf, cfg.cepstral), Scheme::CQCC);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown scheme");
}

Spectrum log_spectrum(const audio::AudioBuffer& buf, std::size_t segment) {
  if (buf.empty()) throw Error(ErrorCode::EmptyAudio, "spectrum of an empty buffer");
  const std::size_t seg = std::max<std::size_t>(2, std::min(segment, buf.size()));
  const std::size_t hop = std::max<std::size_t>(1, seg / 2);
  const int fs = buf.sample_rate();

  std::vector<double> window(seg);
  double wsq = 0.0;
  for (std::size_t i = 0; i < seg; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(seg));
    wsq += window[i] * window[i];
  }

  const std::size_t n_bins = seg / 2 + 1;
  std::vector<double> psd(n_bins, 0.0);
  detail::RealFft fft(seg);
  std::vector<double> frame(seg);
  const auto x = buf.samples();
  const std::size_t n_segments = frame_count(x.size(), seg, hop);
  for (std::size_t s = 0; s < n_segments; ++s) {
    for (std::size_t i = 0; i < seg; ++i) frame[i] = x[s * hop + i] * window[i];
    const auto spec = fft.forward(frame);
    for (std::size_t k = 0; k < n_bins; ++k) psd[k] += std::norm(spec[k]);
  }

  Spectrum out;
  out.freq_hz.resize(n_bins);
  out.magnitude_db.resize(n_bins);
  const double scale = 1.0 / (static_cast<double>(n_segments) * fs * wsq);
  for (std::size_t k = 0; k < n_bins; ++k) {
    const bool edge = k == 0 || (seg % 2 == 0 && k == n_bins - 1);
    const double p = psd[k] * scale * (edge ? 1.0 : 2.0);
    out.freq_hz[k] = static_cast<double>(k) * fs / static_cast<double>(seg);
    out.magnitude_db[k] = 10.0 * std::log10(std::max(p, 1e-30));
  }
  return out;
}

double band_mean_db(const Spectrum& s, double lo_hz, double hi_hz) {
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < s.freq_hz.size(); ++k) {
    if (s.freq_hz[k] >= lo_hz && s.freq_hz[k] < hi_hz) {
      acc += s.magnitude_db[k];
      ++n;
    }
  }
  if (n == 0) throw Error(ErrorCode::InvalidBand, "no spectrum bins in band");
  return acc / static_cast<double>(n);
}

double band_energy_db(const Spectrum& s, double lo_hz, double hi_hz) {
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < s.freq_hz.size(); ++k) {
    if (s.freq_hz[k] >= lo_hz && s.freq_hz[k] < hi_hz) {
      acc += std::pow(10.0, s.magnitude_db[k] / 10.0);
      ++n;
    }
  }
  if (n == 0) throw Error(ErrorCode::InvalidBand, "no spectrum bins in band");
  return 10.0 * std::log10(std::max(acc, 1e-300));
}

}  // namespace laserguard::features
