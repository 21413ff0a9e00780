#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "laserguard/audio.hpp"

namespace laserguard::dataset {

enum class Label { Acoustic, Laser };

std::string to_string(Label l);
Label parse_label(const std::string& s);
/// +1 for laser, -1 for acoustic.
int to_sign(Label l);

struct ClipRecord {
  std::string clip_id;
  int speaker_id = 0;
  int utterance_id = 0;
  Label label = Label::Acoustic;
  std::filesystem::path path;  ///< absolute, or relative to the working directory
};

/// CSV with header clip_id,speaker_id,utterance_id,label,path. Relative
/// paths are resolved against the manifest's directory. Rejects duplicate
/// clip ids and duplicate (speaker, utterance, label) keys.
std::vector<ClipRecord> load_manifest(const std::filesystem::path& path);

/// Paths are written relative to the manifest directory when possible.
void write_manifest(const std::filesystem::path& path, const std::vector<ClipRecord>& records);

enum class Protocol { SD_TD, SI_TD, SI_TI };

std::string to_string(Protocol p);
Protocol parse_protocol(const std::string& s);

/// Indices into the record list, ascending.
struct Partition {
  Protocol protocol = Protocol::SD_TD;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// SD_TD: seeded shuffle, first floor(0.7 N) train.
/// SI_TD: lowest 14 speaker ids train, remaining 5 test.
/// SI_TI: lowest 14 speakers with lowest 3 utterance ids train; remaining 5
/// speakers with the other 2 utterances test. SI protocols need the full
/// 19 x 5 x 2 corpus.
Partition make_partition(const std::vector<ClipRecord>& records, Protocol protocol, std::uint64_t seed);

// -- synthetic corpus --------------------------------------------------------

struct SynthConfig {
  std::uint64_t seed = 1;
  int n_speakers = 19;
  int n_utterances = 5;
  double clip_seconds = 3.0;
  int sample_rate = audio::kCanonicalRate;
  /// Laser channel: low-pass cutoff and additive low-frequency noise.
  double cutoff_hz = 2000.0;
  double lf_noise_low_hz = 0.0;
  double lf_noise_high_hz = 2000.0;
  double lf_noise_snr_db = 10.0;
  /// Acoustic channel: room reverberation and broadband sensor noise.
  double rt60_s = 0.3;
  double acoustic_noise_snr_db = 30.0;

  void validate() const;
};

/// Dry "speech" shared by the acoustic and laser versions of one
/// (speaker, utterance): voiced syllables from a glottal pulse train through
/// formant resonators, with unvoiced frication between some syllables.
std::vector<double> synth_dry_utterance(const SynthConfig& cfg, int speaker, int utterance);

/// Channel-rendered, peak-normalized clip.
audio::AudioBuffer synth_clip(const SynthConfig& cfg, int speaker, int utterance, Label label);

std::string synth_clip_id(int speaker, int utterance, Label label);

/// Writes every clip as 16-bit WAV plus manifest.csv into out_dir and
/// returns the records in manifest order. `jobs` > 1 renders in parallel;
/// output bytes do not depend on it.
std::vector<ClipRecord> synth_corpus(const SynthConfig& cfg, const std::filesystem::path& out_dir,
                                     unsigned jobs = 1);

// -- anti-forensic noise -----------------------------------------------------

inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

/// Adds seeded white noise band-limited to [band.first, band.second] Hz,
/// scaled so signal power / noise power = snr_db. If the sum would clip it
/// is rescaled to peak 1. snr_db = +inf returns the input unchanged.
audio::AudioBuffer add_colored_noise(const audio::AudioBuffer& buf, std::pair<double, double> band_hz,
                                     double snr_db, std::uint64_t seed);

/// Head's first boundary_s seconds followed by all of `tail`.
audio::AudioBuffer splice(const audio::AudioBuffer& head, const audio::AudioBuffer& tail, double boundary_s);

}  // namespace laserguard::dataset
