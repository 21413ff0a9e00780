#include "laserguard/audio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numbers>

#include "io_util.hpp"
#include "laserguard/error.hpp"

namespace laserguard::audio {

namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

struct FmtChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
};

double decode_sample(const std::uint8_t* p, const FmtChunk& fmt) {
  if (fmt.format == kFormatFloat) {
    return static_cast<double>(std::bit_cast<float>(read_u32(p)));
  }
  switch (fmt.bits) {
    case 8:
      return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16:
      return static_cast<std::int16_t>(read_u16(p)) / 32768.0;
    case 24: {
      std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    default:
      return static_cast<std::int32_t>(read_u32(p)) / 2147483648.0;
  }
}

double bessel_i0(double x) { return std::cyl_bessel_i(0.0, x); }

}  // namespace

AudioBuffer::AudioBuffer(std::vector<double> samples, int sample_rate_hz)
    : samples_(std::move(samples)), rate_(sample_rate_hz) {
  if (rate_ <= 0) {
    throw Error(ErrorCode::InvalidArgument, "sample rate must be positive");
  }
  for (double s : samples_) {
    if (!std::isfinite(s)) throw Error(ErrorCode::NonFiniteInput, "audio sample is not finite");
  }
}

AudioBuffer AudioBuffer::slice(std::size_t begin, std::size_t count) const {
  begin = std::min(begin, samples_.size());
  count = std::min(count, samples_.size() - begin);
  return AudioBuffer(std::vector<double>(samples_.begin() + static_cast<std::ptrdiff_t>(begin),
                                         samples_.begin() + static_cast<std::ptrdiff_t>(begin + count)),
                     rate_);
}

AudioBuffer load_wav(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::NotFound, path.string());
  }
  const auto bytes = detail::read_file_bytes(path);
  const std::size_t n = bytes.size();
  if (n < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorCode::CorruptHeader, path.string() + ": not a RIFF/WAVE file");
  }

  FmtChunk fmt;
  bool have_fmt = false;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= n) {
    const std::uint8_t* hdr = bytes.data() + pos;
    const std::uint32_t size = read_u32(hdr + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (size < 16 || body + size > n) {
        throw Error(ErrorCode::CorruptHeader, path.string() + ": truncated fmt chunk");
      }
      const std::uint8_t* f = bytes.data() + body;
      fmt.format = read_u16(f);
      fmt.channels = read_u16(f + 2);
      fmt.rate = read_u32(f + 4);
      fmt.block_align = read_u16(f + 12);
      fmt.bits = read_u16(f + 14);
      if (fmt.format == kFormatExtensible) {
        if (size < 40) throw Error(ErrorCode::CorruptHeader, path.string() + ": short extensible fmt");
        fmt.format = read_u16(f + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      if (body + size > n) {
        throw Error(ErrorCode::CorruptHeader, path.string() + ": data chunk exceeds file size");
      }
      data = bytes.data() + body;
      data_size = size;
      if (have_fmt) break;
    }
    pos = body + size + (size & 1u);
  }

  if (!have_fmt || data == nullptr) {
    throw Error(ErrorCode::CorruptHeader, path.string() + ": missing fmt or data chunk");
  }
  const bool int_ok = fmt.format == kFormatPcm &&
                      (fmt.bits == 8 || fmt.bits == 16 || fmt.bits == 24 || fmt.bits == 32);
  const bool float_ok = fmt.format == kFormatFloat && fmt.bits == 32;
  if (!int_ok && !float_ok) {
    throw Error(ErrorCode::UnsupportedFormat,
                path.string() + ": format tag " + std::to_string(fmt.format) + " with " +
                    std::to_string(fmt.bits) + " bits");
  }
  if (fmt.channels < 1 || fmt.channels > 2) {
    throw Error(ErrorCode::UnsupportedFormat,
                path.string() + ": " + std::to_string(fmt.channels) + " channels");
  }
  const std::size_t sample_bytes = fmt.bits / 8u;
  if (fmt.rate == 0 || fmt.block_align != sample_bytes * fmt.channels) {
    throw Error(ErrorCode::CorruptHeader, path.string() + ": inconsistent block alignment");
  }

  const std::size_t frames = data_size / fmt.block_align;
  if (frames == 0) throw Error(ErrorCode::EmptyAudio, path.string());

  std::vector<double> out(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const std::uint8_t* p = data + i * fmt.block_align;
    double acc = 0.0;
    for (unsigned c = 0; c < fmt.channels; ++c) acc += decode_sample(p + c * sample_bytes, fmt);
    out[i] = acc / fmt.channels;
  }
  for (double s : out) {
    if (!std::isfinite(s)) throw Error(ErrorCode::CorruptHeader, path.string() + ": non-finite float sample");
  }
  return AudioBuffer(std::move(out), static_cast<int>(fmt.rate));
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& buf) {
  const auto samples = buf.samples();
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(buf.sample_rate()));
  put_u32(out, static_cast<std::uint32_t>(buf.sample_rate()) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, data_bytes);
  for (double s : samples) {
    const double scaled = std::round(std::clamp(s, -1.0, 1.0) * 32768.0);
    const auto q = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    put_u16(out, static_cast<std::uint16_t>(q));
  }
  detail::write_file_atomic(path, out);
}

AudioBuffer resample(const AudioBuffer& buf, int target_hz) {
  if (target_hz <= 0) throw Error(ErrorCode::InvalidArgument, "target rate must be positive");
  if (buf.empty()) throw Error(ErrorCode::EmptyAudio, "cannot resample an empty buffer");
  const int source_hz = buf.sample_rate();
  if (source_hz == target_hz) return buf;

  const auto in = buf.samples();
  const std::size_t n_in = in.size();
  const auto n_out = static_cast<std::size_t>(
      (static_cast<unsigned long long>(n_in) * target_hz + source_hz - 1) / source_hz);

  // Lowpass at the lower Nyquist, slightly inside it.
  const double ratio = static_cast<double>(target_hz) / source_hz;
  const double cutoff = 0.97 * std::min(1.0, ratio);  // relative to source Nyquist
  constexpr double kZeroCrossings = 32.0;
  constexpr double kBeta = 8.6;
  const double half_width = kZeroCrossings / cutoff;  // in source samples
  const double norm = bessel_i0(kBeta);

  std::vector<double> out(n_out);
  for (std::size_t k = 0; k < n_out; ++k) {
    const double t = static_cast<double>(k) / ratio;
    const auto lo = static_cast<long long>(std::ceil(t - half_width));
    const auto hi = static_cast<long long>(std::floor(t + half_width));
    double acc = 0.0;
    for (long long i = std::max(lo, 0LL); i <= std::min(hi, static_cast<long long>(n_in) - 1); ++i) {
      const double x = static_cast<double>(i) - t;
      const double u = x / half_width;
      const double window = bessel_i0(kBeta * std::sqrt(std::max(0.0, 1.0 - u * u))) / norm;
      const double arg = std::numbers::pi * cutoff * x;
      const double sinc = (x == 0.0) ? 1.0 : std::sin(arg) / arg;
      acc += in[static_cast<std::size_t>(i)] * cutoff * sinc * window;
    }
    out[k] = acc;
  }
  return AudioBuffer(std::move(out), target_hz);
}

AudioBuffer load_canonical(const std::filesystem::path& path) {
  auto buf = load_wav(path);
  if (buf.sample_rate() != kCanonicalRate) return resample(buf, kCanonicalRate);
  return buf;
}

}  // namespace laserguard::audio
