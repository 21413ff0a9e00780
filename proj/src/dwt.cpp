#include "laserguard/dwt.hpp"

#include <cmath>

#include "laserguard/error.hpp"

namespace laserguard::dwt {

namespace {

FilterBank make_bank(std::vector<double> lo) {
  const std::size_t f = lo.size();
  std::vector<double> hi(f);
  for (std::size_t k = 0; k < f; ++k) {
    hi[k] = ((k % 2 == 0) ? -1.0 : 1.0) * lo[f - 1 - k];
  }
  return {std::move(lo), std::move(hi)};
}

// Index into the boundary-extended signal. Symmetric extension is
// half-sample (x[-1] = x[0]), periodic with period 2n.
inline double extended(std::span<const double> x, long long i, Boundary boundary) {
  const auto n = static_cast<long long>(x.size());
  if (i >= 0 && i < n) return x[static_cast<std::size_t>(i)];
  if (boundary == Boundary::ZeroPad) return 0.0;
  long long r = i % (2 * n);
  if (r < 0) r += 2 * n;
  return x[static_cast<std::size_t>(r < n ? r : 2 * n - 1 - r)];
}

}  // namespace

std::string to_string(Family f) { return f == Family::Haar ? "haar" : "db4"; }
std::string to_string(Boundary b) { return b == Boundary::Symmetric ? "symmetric" : "zero"; }

Family parse_family(const std::string& name) {
  if (name == "haar") return Family::Haar;
  if (name == "db4") return Family::Daubechies4;
  throw Error(ErrorCode::InvalidArgument, "unknown wavelet family '" + name + "'");
}

Boundary parse_boundary(const std::string& name) {
  if (name == "symmetric") return Boundary::Symmetric;
  if (name == "zero") return Boundary::ZeroPad;
  throw Error(ErrorCode::InvalidArgument, "unknown boundary mode '" + name + "'");
}

void WaveletSpec::validate() const {
  if (level < 1) throw Error(ErrorCode::InvalidLevel, "decomposition level must be >= 1");
}

const FilterBank& filter_bank(Family family) {
  static const FilterBank haar = make_bank({M_SQRT1_2, M_SQRT1_2});
  // Daubechies, 4 vanishing moments (8 taps), stored in reversed
  // (time-reversed scaling function) order to match the convolution above.
  static const FilterBank db4 = make_bank({
      -0.010597401785069032,
      0.032883011666885200,
      0.030841381835560764,
      -0.18703481171909309,
      -0.027983769416859854,
      0.63088076792985891,
      0.71484657055291565,
      0.23037781330889650,
  });
  return family == Family::Haar ? haar : db4;
}

std::size_t coeff_length(std::size_t n, std::size_t filter_length) {
  return (n + filter_length - 1) / 2;
}

int max_level(std::size_t n) {
  int level = 0;
  while (n >= 2) {
    n >>= 1;
    ++level;
  }
  return level;
}

LevelCoefficients analysis_step(std::span<const double> x, const FilterBank& bank, Boundary boundary) {
  const std::size_t f = bank.length();
  const std::size_t m = coeff_length(x.size(), f);
  LevelCoefficients out{std::vector<double>(m), std::vector<double>(m)};
  for (std::size_t o = 0; o < m; ++o) {
    const auto base = static_cast<long long>(2 * o + 1);
    double a = 0.0;
    double d = 0.0;
    for (std::size_t j = 0; j < f; ++j) {
      const double v = extended(x, base - static_cast<long long>(j), boundary);
      a += bank.lo[j] * v;
      d += bank.hi[j] * v;
    }
    out.approx[o] = a;
    out.detail[o] = d;
  }
  return out;
}

std::vector<double> synthesis_step(std::span<const double> approx, std::span<const double> detail,
                                   const FilterBank& bank, std::size_t out_len) {
  if (approx.size() != detail.size()) {
    throw Error(ErrorCode::InconsistentShapes, "approximation and detail lengths differ");
  }
  const auto f = static_cast<long long>(bank.length());
  const auto m = static_cast<long long>(approx.size());
  std::vector<double> x(out_len, 0.0);
  for (std::size_t t = 0; t < out_len; ++t) {
    const auto mm = static_cast<long long>(t);
    // Coefficients o with 0 <= 2o + 1 - t <= f - 1.
    const long long o_lo = std::max(0LL, mm / 2);
    const long long o_hi = std::min(m - 1, (mm + f - 2) / 2);
    double acc = 0.0;
    for (long long o = o_lo; o <= o_hi; ++o) {
      const long long j = 2 * o + 1 - mm;
      if (j < 0 || j >= f) continue;
      acc += approx[static_cast<std::size_t>(o)] * bank.lo[static_cast<std::size_t>(j)] +
             detail[static_cast<std::size_t>(o)] * bank.hi[static_cast<std::size_t>(j)];
    }
    x[t] = acc;
  }
  return x;
}

WaveletDecomposition dwt_multilevel(std::span<const double> x, const WaveletSpec& spec) {
  spec.validate();
  int level = spec.level;
  const int available = max_level(x.size());
  if (level > available) {
    if (!spec.clamp_short_signals || available < 1) {
      throw Error(ErrorCode::SignalTooShort,
                  std::to_string(x.size()) + " samples cannot be decomposed to level " +
                      std::to_string(spec.level));
    }
    level = available;
  }

  const FilterBank& bank = filter_bank(spec.family);
  WaveletDecomposition dec;
  dec.spec = spec;
  dec.spec.level = level;
  dec.requested_level = spec.level;
  dec.details.resize(static_cast<std::size_t>(level));

  std::vector<double> current(x.begin(), x.end());
  for (int k = 1; k <= level; ++k) {
    auto step = analysis_step(current, bank, spec.boundary);
    dec.details[static_cast<std::size_t>(level - k)] = std::move(step.detail);
    current = std::move(step.approx);
  }
  dec.approx = std::move(current);
  return dec;
}

WaveletDecomposition dwt_multilevel(const audio::AudioBuffer& buf, const WaveletSpec& spec) {
  if (buf.empty()) throw Error(ErrorCode::EmptyAudio, "cannot decompose an empty buffer");
  return dwt_multilevel(buf.samples(), spec);
}

std::vector<double> idwt_multilevel(const WaveletDecomposition& dec, std::size_t original_len) {
  const FilterBank& bank = filter_bank(dec.spec.family);
  const int level = dec.level();
  if (level < 1) throw Error(ErrorCode::InconsistentShapes, "decomposition has no detail arrays");

  std::vector<std::size_t> lengths{original_len};
  for (int k = 1; k <= level; ++k) lengths.push_back(coeff_length(lengths.back(), bank.length()));

  if (dec.approx.size() != lengths.back()) {
    throw Error(ErrorCode::InconsistentShapes,
                "CA has " + std::to_string(dec.approx.size()) + " coefficients, expected " +
                    std::to_string(lengths.back()));
  }
  for (int k = 1; k <= level; ++k) {
    const auto& d = dec.details[static_cast<std::size_t>(level - k)];
    if (d.size() != lengths[static_cast<std::size_t>(k)]) {
      throw Error(ErrorCode::InconsistentShapes,
                  "CD_" + std::to_string(k) + " has " + std::to_string(d.size()) +
                      " coefficients, expected " + std::to_string(lengths[static_cast<std::size_t>(k)]));
    }
  }

  std::vector<double> current = dec.approx;
  for (int k = level; k >= 1; --k) {
    current = synthesis_step(current, dec.details[static_cast<std::size_t>(level - k)], bank,
                             lengths[static_cast<std::size_t>(k - 1)]);
  }
  return current;
}

}  // namespace laserguard::dwt
