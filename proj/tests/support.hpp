#pragma once

// Shared helpers for the unit tests: hand-rolled generators, scratch
// directories and a lazily generated synthetic corpus.

#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "laserguard/dataset.hpp"
#include "laserguard/error.hpp"
#include "laserguard/random.hpp"

#include <unistd.h>

namespace testing {

namespace fs = std::filesystem;

inline std::vector<double> normal_signal(laserguard::Rng& rng, std::size_t n, double sigma = 1.0) {
  std::vector<double> x(n);
  for (auto& v : x) v = sigma * rng.normal();
  return x;
}

inline std::vector<double> uniform_signal(laserguard::Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform(lo, hi);
  return x;
}

inline std::vector<double> tone(double freq, double rate, std::size_t n, double amp = 0.5, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2.0 * std::numbers::pi * freq * i / rate + phase);
  return x;
}

inline double energy(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("laserguard_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void write_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream f(p, std::ios::binary);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline std::string read_text(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

/// Default synthetic corpus (seed 1), generated once per test binary.
inline const std::vector<laserguard::dataset::ClipRecord>& default_corpus() {
  static TempDir dir;
  static const auto records = laserguard::dataset::synth_corpus(laserguard::dataset::SynthConfig{}, dir.path(), 4);
  return records;
}

}  // namespace testing

#define CHECK_ERROR_CODE(expr, ecode)                      \
  do {                                                     \
    bool thrown_ = false;                                  \
    try {                                                  \
      (void)(expr);                                        \
    } catch (const laserguard::Error& e_) {                \
      thrown_ = true;                                      \
      CHECK_MESSAGE(e_.code() == (ecode), e_.what());      \
    }                                                      \
    CHECK_MESSAGE(thrown_, "expected " #ecode);            \
  } while (false)
