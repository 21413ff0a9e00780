#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "fft.hpp"
#include "laserguard/dataset.hpp"
#include "laserguard/error.hpp"
#include "laserguard/parallel.hpp"
#include "laserguard/random.hpp"

namespace laserguard::dataset {

namespace {

// Stream tags for derive_seed.
constexpr std::uint64_t kSpeakerStream = 0x53504b;
constexpr std::uint64_t kUtteranceStream = 0x555454;
constexpr std::uint64_t kPerformanceStream = 0x504552;
constexpr std::uint64_t kChannelStream = 0x43484e;

constexpr double kPeak = 0.5;

struct Vowel {
  double f1, f2, f3;
};

// Rough adult formant targets (Hz) for a handful of vowels.
constexpr std::array<Vowel, 7> kVowels{{
    {730, 1090, 2440},
    {270, 2290, 3010},
    {530, 1840, 2480},
    {660, 1720, 2410},
    {570, 840, 2410},
    {300, 870, 2240},
    {490, 1350, 1690},
}};

/// Two-pole resonator with unity gain at its center frequency.
class Resonator {
 public:
  Resonator(double freq, double bandwidth, double fs) {
    const double r = std::exp(-std::numbers::pi * bandwidth / fs);
    const double theta = 2.0 * std::numbers::pi * freq / fs;
    a1_ = 2.0 * r * std::cos(theta);
    a2_ = -r * r;
    gain_ = (1.0 - r) * std::sqrt(1.0 - 2.0 * r * std::cos(2.0 * theta) + r * r);
  }
  double operator()(double x) {
    const double y = gain_ * x + a1_ * y1_ + a2_ * y2_;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double a1_ = 0, a2_ = 0, gain_ = 1, y1_ = 0, y2_ = 0;
};

/// RBJ lowpass biquad, transposed direct form II.
class Biquad {
 public:
  Biquad(double cutoff, double q, double fs) {
    const double w0 = 2.0 * std::numbers::pi * cutoff / fs;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double c = std::cos(w0);
    const double a0 = 1.0 + alpha;
    b0_ = (1.0 - c) / 2.0 / a0;
    b1_ = (1.0 - c) / a0;
    b2_ = b0_;
    a1_ = -2.0 * c / a0;
    a2_ = (1.0 - alpha) / a0;
  }
  double operator()(double x) {
    const double y = b0_ * x + z1_;
    z1_ = b1_ * x - a1_ * y + z2_;
    z2_ = b2_ * x - a2_ * y;
    return y;
  }

 private:
  double b0_, b1_, b2_, a1_, a2_;
  double z1_ = 0, z2_ = 0;
};

std::vector<double> butterworth_lowpass4(std::span<const double> x, double cutoff, double fs) {
  Biquad s1(cutoff, 0.54119610014619698, fs);
  Biquad s2(cutoff, 1.3065629648763766, fs);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = s2(s1(x[i]));
  return y;
}

void add_white_noise(std::vector<double>& x, double snr_db, Rng& rng) {
  double power = 0.0;
  for (double v : x) power += v * v;
  power /= static_cast<double>(x.size());
  const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
  for (double& v : x) v += sigma * rng.normal();
}

void normalize_peak(std::vector<double>& x, double peak) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  if (m > 0.0) {
    for (double& v : x) v *= peak / m;
  }
}

struct SpeakerTraits {
  double f0;
  double formant_scale;
  double tempo;
  double breathiness;
  double jitter;
};

SpeakerTraits speaker_traits(const SynthConfig& cfg, int speaker) {
  Rng rng(derive_seed({cfg.seed, kSpeakerStream, static_cast<std::uint64_t>(speaker)}));
  SpeakerTraits t{};
  t.f0 = rng.uniform(90.0, 250.0);
  t.formant_scale = rng.uniform(0.85, 1.18);
  t.tempo = rng.uniform(0.85, 1.15);
  t.breathiness = rng.uniform(0.02, 0.08);
  t.jitter = rng.uniform(0.005, 0.02);
  return t;
}

struct Syllable {
  int vowel;
  double vowel_s;
  int onset;  // 0 none, 1 fricative, 2 plosive burst
  double onset_s;
  double gap_s;
  double pitch_slope;  // relative f0 change across the vowel
};

std::vector<Syllable> utterance_script(const SynthConfig& cfg, int utterance) {
  Rng rng(derive_seed({cfg.seed, kUtteranceStream, static_cast<std::uint64_t>(utterance)}));
  const int count = 6 + static_cast<int>(rng.below(5));
  std::vector<Syllable> script(static_cast<std::size_t>(count));
  for (auto& s : script) {
    s.vowel = static_cast<int>(rng.below(kVowels.size()));
    s.vowel_s = rng.uniform(0.10, 0.24);
    s.onset = static_cast<int>(rng.below(3));
    s.onset_s = rng.uniform(0.04, 0.09);
    s.gap_s = rng.uniform(0.02, 0.07);
    s.pitch_slope = rng.uniform(-0.25, 0.15);
  }
  return script;
}

double envelope(std::size_t i, std::size_t len, std::size_t ramp) {
  ramp = std::max<std::size_t>(1, std::min(ramp, len / 2));
  double t = 1.0;
  if (i < ramp) t = static_cast<double>(i) / static_cast<double>(ramp);
  else if (i + ramp >= len) t = static_cast<double>(len - i) / static_cast<double>(ramp);
  const double s = std::sin(0.5 * std::numbers::pi * t);
  return s * s;
}

}  // namespace

void SynthConfig::validate() const {
  if (n_speakers < 1 || n_utterances < 1) throw Error(ErrorCode::InvalidArgument, "need at least one speaker and utterance");
  if (!(clip_seconds > 1.0)) throw Error(ErrorCode::InvalidArgument, "clip_seconds must exceed 1 s");
  if (sample_rate <= 0) throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
  const double nyquist = sample_rate / 2.0;
  if (!(cutoff_hz > 0.0 && cutoff_hz < nyquist)) throw Error(ErrorCode::InvalidArgument, "cutoff must lie below Nyquist");
  if (!(lf_noise_low_hz >= 0.0 && lf_noise_low_hz < lf_noise_high_hz && lf_noise_high_hz <= nyquist)) {
    throw Error(ErrorCode::InvalidBand, "low-frequency noise band must satisfy 0 <= low < high <= Nyquist");
  }
  if (!(rt60_s > 0.0)) throw Error(ErrorCode::InvalidArgument, "rt60 must be positive");
}

std::vector<double> synth_dry_utterance(const SynthConfig& cfg, int speaker, int utterance) {
  cfg.validate();
  const double fs = cfg.sample_rate;
  const auto n = static_cast<std::size_t>(std::llround(cfg.clip_seconds * fs));
  const SpeakerTraits who = speaker_traits(cfg, speaker);
  const auto script = utterance_script(cfg, utterance);
  Rng rng(derive_seed({cfg.seed, kPerformanceStream, static_cast<std::uint64_t>(speaker),
                       static_cast<std::uint64_t>(utterance)}));

  std::vector<double> out(n, 0.0);
  auto pos = static_cast<std::size_t>(rng.uniform(0.08, 0.2) * fs);
  const std::size_t tail = static_cast<std::size_t>(0.1 * fs);

  for (const auto& syl : script) {
    const double level = rng.uniform(0.6, 1.0);

    if (syl.onset != 0) {
      const auto len = static_cast<std::size_t>(syl.onset_s * who.tempo * fs * (syl.onset == 2 ? 0.4 : 1.0));
      if (pos + len + tail >= n) break;
      Resonator hiss(rng.uniform(3500.0, 6000.0), 2500.0, fs);
      const double gain = syl.onset == 1 ? 0.35 : 0.6;
      for (std::size_t i = 0; i < len; ++i) {
        out[pos + i] += level * gain * envelope(i, len, len / 4) * hiss(rng.normal());
      }
      pos += len;
    }

    const auto len = static_cast<std::size_t>(syl.vowel_s * who.tempo * fs);
    if (pos + len + tail >= n) break;
    const Vowel& v = kVowels[static_cast<std::size_t>(syl.vowel)];
    Resonator f1(v.f1 * who.formant_scale, 80.0, fs);
    Resonator f2(v.f2 * who.formant_scale, 110.0, fs);
    Resonator f3(std::min(v.f3 * who.formant_scale, 0.45 * fs), 160.0, fs);
    double glottal = 0.0;
    double phase = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(len);
      const double f0 = who.f0 * (1.0 + syl.pitch_slope * t) * (1.0 + who.jitter * rng.normal());
      phase += f0 / fs;
      double pulse = 0.0;
      if (phase >= 1.0) {
        phase -= 1.0;
        pulse = 1.0;
      }
      // Spectral tilt of the glottal source.
      glottal = 0.9 * glottal + pulse + who.breathiness * rng.normal();
      const double voiced = f1(glottal) + 0.6 * f2(glottal) + 0.3 * f3(glottal);
      out[pos + i] += level * envelope(i, len, static_cast<std::size_t>(0.02 * fs)) * voiced;
    }
    pos += len + static_cast<std::size_t>(syl.gap_s * who.tempo * fs);
  }
  normalize_peak(out, 0.9);
  return out;
}

std::string synth_clip_id(int speaker, int utterance, Label label) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "s%02d_u%d_%s", speaker, utterance, to_string(label).c_str());
  return buf;
}

audio::AudioBuffer synth_clip(const SynthConfig& cfg, int speaker, int utterance, Label label) {
  const auto dry = synth_dry_utterance(cfg, speaker, utterance);
  const double fs = cfg.sample_rate;
  const std::uint64_t clip_seed = derive_seed({cfg.seed, kChannelStream, static_cast<std::uint64_t>(speaker),
                                               static_cast<std::uint64_t>(utterance),
                                               static_cast<std::uint64_t>(label == Label::Laser)});
  Rng rng(clip_seed);
  std::vector<double> wet;

  if (label == Label::Acoustic) {
    // Direct path plus an exponentially decaying diffuse tail (-60 dB at RT60).
    const auto len = static_cast<std::size_t>(cfg.rt60_s * fs);
    std::vector<double> rir(std::max<std::size_t>(len, 2), 0.0);
    rir[0] = 1.0;
    const auto onset = static_cast<std::size_t>(rng.uniform(0.002, 0.008) * fs);
    double tail_energy = 0.0;
    for (std::size_t i = std::max<std::size_t>(onset, 1); i < rir.size(); ++i) {
      rir[i] = rng.normal() * std::exp(-6.907755278982137 * static_cast<double>(i) / (cfg.rt60_s * fs));
      tail_energy += rir[i] * rir[i];
    }
    const double drr = std::pow(10.0, rng.uniform(-3.0, 3.0) / 10.0);
    const double tail_gain = tail_energy > 0.0 ? std::sqrt(1.0 / (drr * tail_energy)) : 0.0;
    for (std::size_t i = 1; i < rir.size(); ++i) rir[i] *= tail_gain;
    wet = detail::fft_convolve(dry, rir);
    wet.resize(dry.size());
    add_white_noise(wet, cfg.acoustic_noise_snr_db, rng);
    normalize_peak(wet, kPeak);
    return audio::AudioBuffer(std::move(wet), cfg.sample_rate);
  }

  wet = butterworth_lowpass4(dry, cfg.cutoff_hz, fs);
  normalize_peak(wet, kPeak);
  auto noisy = add_colored_noise(audio::AudioBuffer(std::move(wet), cfg.sample_rate),
                                 {cfg.lf_noise_low_hz, cfg.lf_noise_high_hz}, cfg.lf_noise_snr_db, rng.next());
  std::vector<double> out(noisy.samples().begin(), noisy.samples().end());
  normalize_peak(out, kPeak);
  return audio::AudioBuffer(std::move(out), cfg.sample_rate);
}

std::vector<ClipRecord> synth_corpus(const SynthConfig& cfg, const std::filesystem::path& out_dir, unsigned jobs) {
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw Error(ErrorCode::IoError, "cannot create corpus directory " + out_dir.string());
  }

  std::vector<ClipRecord> records;
  for (int s = 1; s <= cfg.n_speakers; ++s) {
    for (int u = 1; u <= cfg.n_utterances; ++u) {
      for (Label label : {Label::Acoustic, Label::Laser}) {
        ClipRecord r;
        r.clip_id = synth_clip_id(s, u, label);
        r.speaker_id = s;
        r.utterance_id = u;
        r.label = label;
        r.path = out_dir / (r.clip_id + ".wav");
        records.push_back(std::move(r));
      }
    }
  }

  parallel_for(records.size(), jobs, [&](std::size_t i) {
    const auto& r = records[i];
    audio::write_wav(r.path, synth_clip(cfg, r.speaker_id, r.utterance_id, r.label));
  });
  write_manifest(out_dir / "manifest.csv", records);
  return records;
}

}  // namespace laserguard::dataset
