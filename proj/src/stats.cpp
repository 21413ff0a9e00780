#include "laserguard/stats.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <vector>

#include "laserguard/error.hpp"

namespace laserguard::stats {

namespace {

void check_finite(std::span<const double> xs) {
  for (double x : xs) {
    if (!std::isfinite(x)) throw Error(ErrorCode::NonFiniteInput, "array contains NaN or inf");
  }
}

}  // namespace

MomentSet moments(std::span<const double> xs) {
  if (xs.empty()) throw Error(ErrorCode::EmptyArray, "moments of an empty array");
  check_finite(xs);

  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  const double magnitude = std::max(std::abs(*lo), std::abs(*hi));
  if (*hi - *lo <= 1e-12 * magnitude) return {};

  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;

  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 <= 0.0) return {};

  return {m2, m3 / std::pow(m2, 1.5), m4 / (m2 * m2) - 3.0};
}

std::string to_string(DistributionKind kind) {
  return kind == DistributionKind::Cauchy ? "cauchy" : "lognormal";
}

double DistributionFit::cdf(double x) const {
  if (kind == DistributionKind::Cauchy) {
    return 0.5 + std::atan((x - location) / scale) / std::numbers::pi;
  }
  if (x <= 0.0) return 0.0;
  return 0.5 * std::erfc(-(std::log(x) - location) / (scale * std::numbers::sqrt2));
}

double quantile(std::span<const double> sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto i = static_cast<std::size_t>(std::floor(h));
  if (i + 1 >= sorted.size()) return sorted.back();
  return sorted[i] + (h - static_cast<double>(i)) * (sorted[i + 1] - sorted[i]);
}

DistributionFit fit_distribution(std::span<const double> xs, DistributionKind kind) {
  if (xs.size() < 8) {
    throw Error(ErrorCode::TooFewSamples, "distribution fit needs at least 8 samples, got " +
                                              std::to_string(xs.size()));
  }
  check_finite(xs);

  DistributionFit fit;
  fit.kind = kind;
  std::vector<double> sample;
  sample.reserve(xs.size());

  if (kind == DistributionKind::Cauchy) {
    sample.assign(xs.begin(), xs.end());
    std::sort(sample.begin(), sample.end());
    const double iqr = quantile(sample, 0.75) - quantile(sample, 0.25);
    if (!(iqr > 0.0)) throw Error(ErrorCode::DegenerateData, "interquartile range is zero");
    fit.location = quantile(sample, 0.5);
    fit.scale = 0.5 * iqr;
  } else {
    double mean = 0.0;
    for (double x : xs) {
      sample.push_back(std::abs(x) + DBL_EPSILON);
      mean += std::log(sample.back());
    }
    mean /= static_cast<double>(sample.size());
    double var = 0.0;
    for (double y : sample) var += (std::log(y) - mean) * (std::log(y) - mean);
    var /= static_cast<double>(sample.size());
    std::sort(sample.begin(), sample.end());
    // var can pick up rounding noise from the mean when every |x| is equal
    if (sample.front() == sample.back() || !(var > 0.0)) {
      throw Error(ErrorCode::DegenerateData, "log-magnitudes have zero spread");
    }
    fit.location = mean;
    fit.scale = std::sqrt(var);
  }

  const double n = static_cast<double>(sample.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = fit.cdf(sample[i]);
    ks = std::max({ks, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  fit.ks = std::clamp(ks, 0.0, 1.0);
  return fit;
}

}  // namespace laserguard::stats
