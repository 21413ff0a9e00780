#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace laserguard::audio {

inline constexpr int kCanonicalRate = 16000;

/// Mono PCM clip. Immutable once built; cheap to pass by const reference
/// and safe to share across threads.
class AudioBuffer {
 public:
  AudioBuffer() = default;
  /// Throws InvalidArgument for a non-positive rate and NonFiniteInput for
  /// NaN/inf samples.
  AudioBuffer(std::vector<double> samples, int sample_rate_hz);

  std::span<const double> samples() const noexcept { return samples_; }
  int sample_rate() const noexcept { return rate_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  double duration_s() const noexcept {
    return rate_ > 0 ? static_cast<double>(samples_.size()) / rate_ : 0.0;
  }

  AudioBuffer slice(std::size_t begin, std::size_t count) const;

  friend bool operator==(const AudioBuffer&, const AudioBuffer&) = default;

 private:
  std::vector<double> samples_;
  int rate_ = kCanonicalRate;
};

/// Reads RIFF/WAVE PCM (8/16/24/32-bit integer, 32-bit float; 1 or 2
/// channels). Stereo is averaged to mono; integers are divided by the
/// type's maximum magnitude (2^(bits-1)).
AudioBuffer load_wav(const std::filesystem::path& path);

/// Writes 16-bit little-endian mono PCM. Samples are clamped to [-1, 1].
void write_wav(const std::filesystem::path& path, const AudioBuffer& buf);

/// Windowed-sinc (Kaiser) sample-rate conversion. Identity when the rates
/// already match. Output length is ceil(n * target / source).
AudioBuffer resample(const AudioBuffer& buf, int target_hz);

/// Load, then resample to the canonical pipeline rate if needed.
AudioBuffer load_canonical(const std::filesystem::path& path);

}  // namespace laserguard::audio
