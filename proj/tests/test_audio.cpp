#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "support.hpp"

#include <complex>
#include <cstring>

#include "laserguard/audio.hpp"

using namespace laserguard;
using testing::TempDir;

namespace {

void put_u16(std::string& s, std::uint16_t v) {
  s += static_cast<char>(v & 0xff);
  s += static_cast<char>(v >> 8);
}

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s += static_cast<char>((v >> (8 * i)) & 0xff);
}

std::string wav_bytes(std::uint16_t format, std::uint16_t channels, std::uint32_t rate, std::uint16_t bits,
                      const std::string& data) {
  std::string fmt;
  put_u16(fmt, format);
  put_u16(fmt, channels);
  put_u32(fmt, rate);
  put_u32(fmt, rate * channels * bits / 8);
  put_u16(fmt, static_cast<std::uint16_t>(channels * bits / 8));
  put_u16(fmt, bits);
  std::string body = "WAVE";
  body += "fmt ";
  put_u32(body, static_cast<std::uint32_t>(fmt.size()));
  body += fmt;
  // An unrelated chunk the reader has to skip.
  body += "LIST";
  put_u32(body, 4);
  body += "INFO";
  body += "data";
  put_u32(body, static_cast<std::uint32_t>(data.size()));
  body += data;
  std::string out = "RIFF";
  put_u32(out, static_cast<std::uint32_t>(body.size()));
  return out + body;
}

std::string pcm16(const std::vector<std::int16_t>& v) {
  std::string s;
  for (auto x : v) put_u16(s, static_cast<std::uint16_t>(x));
  return s;
}

std::string f32(const std::vector<float>& v) {
  std::string s(v.size() * 4, '\0');
  std::memcpy(s.data(), v.data(), s.size());
  return s;
}

// Naive DFT magnitude peak over bins [0, n/2], independent of the FFT backend.
std::size_t dft_peak_bin(std::span<const double> x) {
  const std::size_t n = x.size();
  std::size_t best = 0;
  double best_mag = -1.0;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    double re = 0.0, im = 0.0;
    const double w = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    for (std::size_t t = 0; t < n; ++t) {
      re += x[t] * std::cos(w * static_cast<double>(t));
      im += x[t] * std::sin(w * static_cast<double>(t));
    }
    const double mag = re * re + im * im;
    if (mag > best_mag) {
      best_mag = mag;
      best = k;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("16-bit PCM is scaled by 2^15") {
  TempDir dir;
  testing::write_bytes(dir / "a.wav", wav_bytes(1, 1, 16000, 16, pcm16({0, 16384, -32768})));
  const auto buf = audio::load_wav(dir / "a.wav");
  REQUIRE(buf.size() == 3);
  CHECK(buf.samples()[0] == 0.0);
  CHECK(buf.samples()[1] == 0.5);
  CHECK(buf.samples()[2] == -1.0);
  CHECK(buf.sample_rate() == 16000);
}

TEST_CASE("stereo is averaged to mono") {
  TempDir dir;
  testing::write_bytes(dir / "f.wav", wav_bytes(3, 2, 22050, 32, f32({0.2f, 0.4f})));
  const auto buf = audio::load_wav(dir / "f.wav");
  REQUIRE(buf.size() == 1);
  CHECK(buf.samples()[0] == doctest::Approx(0.3).epsilon(1e-7));
  CHECK(buf.sample_rate() == 22050);

  testing::write_bytes(dir / "i.wav", wav_bytes(1, 2, 8000, 16, pcm16({8192, 16384})));
  CHECK(audio::load_wav(dir / "i.wav").samples()[0] == 0.375);
}

TEST_CASE("8, 24 and 32-bit integer PCM") {
  TempDir dir;
  testing::write_bytes(dir / "8.wav", wav_bytes(1, 1, 8000, 8, std::string{'\x80', '\xc0', '\x00'}));
  auto b8 = audio::load_wav(dir / "8.wav");
  CHECK(b8.samples()[0] == 0.0);
  CHECK(b8.samples()[1] == 0.5);
  CHECK(b8.samples()[2] == -1.0);

  testing::write_bytes(dir / "24.wav", wav_bytes(1, 1, 8000, 24, std::string{'\x00', '\x00', '\x40', '\x00', '\x00', '\x80'}));
  auto b24 = audio::load_wav(dir / "24.wav");
  CHECK(b24.samples()[0] == 0.5);
  CHECK(b24.samples()[1] == -1.0);

  std::string d32;
  put_u32(d32, 0x40000000u);
  put_u32(d32, 0x80000000u);
  testing::write_bytes(dir / "32.wav", wav_bytes(1, 1, 8000, 32, d32));
  auto b32 = audio::load_wav(dir / "32.wav");
  CHECK(b32.samples()[0] == 0.5);
  CHECK(b32.samples()[1] == -1.0);
}

TEST_CASE("load_wav error kinds") {
  TempDir dir;
  CHECK_ERROR_CODE(audio::load_wav(dir / "missing.wav"), ErrorCode::NotFound);

  testing::write_bytes(dir / "empty.wav", wav_bytes(1, 1, 16000, 16, ""));
  CHECK_ERROR_CODE(audio::load_wav(dir / "empty.wav"), ErrorCode::EmptyAudio);

  testing::write_bytes(dir / "junk.wav", "not a wave file at all, just text");
  CHECK_ERROR_CODE(audio::load_wav(dir / "junk.wav"), ErrorCode::CorruptHeader);

  testing::write_bytes(dir / "mp3.wav", wav_bytes(0x55, 1, 16000, 16, pcm16({1, 2})));
  CHECK_ERROR_CODE(audio::load_wav(dir / "mp3.wav"), ErrorCode::UnsupportedFormat);

  testing::write_bytes(dir / "3ch.wav", wav_bytes(1, 3, 16000, 16, pcm16({1, 2, 3})));
  CHECK_ERROR_CODE(audio::load_wav(dir / "3ch.wav"), ErrorCode::UnsupportedFormat);

  auto truncated = wav_bytes(1, 1, 16000, 16, pcm16({1, 2, 3, 4}));
  truncated.resize(truncated.size() - 4);
  testing::write_bytes(dir / "trunc.wav", truncated);
  CHECK_ERROR_CODE(audio::load_wav(dir / "trunc.wav"), ErrorCode::CorruptHeader);
}

TEST_CASE("AudioBuffer validates its invariants") {
  CHECK_ERROR_CODE(audio::AudioBuffer({0.0}, 0), ErrorCode::InvalidArgument);
  CHECK_ERROR_CODE(audio::AudioBuffer({0.0, std::nan("")}, 16000), ErrorCode::NonFiniteInput);
  CHECK_ERROR_CODE(audio::AudioBuffer({INFINITY}, 16000), ErrorCode::NonFiniteInput);
}

TEST_CASE("write then load is a fixed point after 16-bit quantization") {
  TempDir dir;
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const auto n = 1 + rng.below(5000);
    auto x = testing::uniform_signal(rng, n, -1.2, 1.2);  // includes clipping
    audio::write_wav(dir / "a.wav", audio::AudioBuffer(x, 16000));
    const auto once = audio::load_wav(dir / "a.wav");
    audio::write_wav(dir / "b.wav", once);
    const auto twice = audio::load_wav(dir / "b.wav");
    CHECK(once == twice);
    CHECK(testing::read_text(dir / "a.wav") == testing::read_text(dir / "b.wav"));
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(once.samples()[i] - std::clamp(x[i], -1.0, 1.0)) <= 1.0 / 32768.0);
    }
  }
}

TEST_CASE("write_wav into a missing directory is an IoError") {
  TempDir dir;
  CHECK_ERROR_CODE(audio::write_wav(dir / "nope" / "a.wav", audio::AudioBuffer({0.1}, 16000)), ErrorCode::IoError);
}

TEST_CASE("resample identity is bit-identical") {
  Rng rng(3);
  const audio::AudioBuffer buf(testing::normal_signal(rng, 777, 0.1), 16000);
  CHECK(audio::resample(buf, 16000) == buf);
}

TEST_CASE("resample length arithmetic") {
  const audio::AudioBuffer buf(std::vector<double>(1000, 0.0), 48000);
  CHECK(audio::resample(buf, 16000).size() == 334);
  CHECK(audio::resample(audio::AudioBuffer(std::vector<double>(441, 0.0), 44100), 16000).size() == 160);
  CHECK_ERROR_CODE(audio::resample(audio::AudioBuffer({}, 44100), 16000), ErrorCode::EmptyAudio);
}

TEST_CASE("1 kHz tone at 44.1 kHz keeps its frequency at 16 kHz") {
  const audio::AudioBuffer buf(testing::tone(1000.0, 44100.0, 44100), 44100);
  const auto out = audio::resample(buf, 16000);
  REQUIRE(out.sample_rate() == 16000);
  CHECK(std::abs(static_cast<double>(out.size()) / 16000.0 - 1.0) <= 1.0 / 16000.0);
  // 1 s at 16 kHz: bin spacing is 1 Hz.
  const auto peak = dft_peak_bin(out.samples().first(16000));
  CHECK(std::abs(static_cast<long>(peak) - 1000) <= 1);
}

TEST_CASE("property: resampled tones stay within one DFT bin") {
  Rng rng(1234);
  const int rates[] = {8000, 11025, 22050, 32000, 44100, 48000};
  for (int trial = 0; trial < 8; ++trial) {
    const int src = rates[rng.below(6)];
    const int dst = rates[rng.below(6)];
    const double nyq = 0.4 * std::min(src, dst);
    const double f = std::round(rng.uniform(50.0, nyq));
    const audio::AudioBuffer buf(testing::tone(f, src, static_cast<std::size_t>(src) / 4), src);
    const auto out = audio::resample(buf, dst);
    const std::size_t n = out.size();
    const double bin_hz = static_cast<double>(dst) / static_cast<double>(n);
    const double peak_hz = static_cast<double>(dft_peak_bin(out.samples().first(n))) * bin_hz;
    CHECK_MESSAGE(std::abs(peak_hz - f) <= bin_hz, src << " -> " << dst << " at " << f << " Hz");
  }
}

TEST_CASE("load_canonical resamples to 16 kHz") {
  TempDir dir;
  audio::write_wav(dir / "a.wav", audio::AudioBuffer(testing::tone(440.0, 8000.0, 8000), 8000));
  const auto buf = audio::load_canonical(dir / "a.wav");
  CHECK(buf.sample_rate() == audio::kCanonicalRate);
  CHECK(buf.size() == 16000);
}
