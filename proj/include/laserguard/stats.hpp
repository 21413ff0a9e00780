#pragma once

#include <span>
#include <string>

namespace laserguard::stats {

/// Population central moments. Kurtosis is excess (normal = 0).
struct MomentSet {
  double variance = 0.0;
  double skew = 0.0;
  double kurtosis = 0.0;
};

/// An array whose spread is below 1e-12 of its magnitude is treated as
/// constant and yields (0, 0, 0).
MomentSet moments(std::span<const double> xs);

enum class DistributionKind { Cauchy, Lognormal };

std::string to_string(DistributionKind kind);

struct DistributionFit {
  DistributionKind kind = DistributionKind::Cauchy;
  /// Cauchy: median. Lognormal: mean of log(|x| + eps).
  double location = 0.0;
  /// Cauchy: half the interquartile range. Lognormal: std of log(|x| + eps).
  double scale = 1.0;
  /// Kolmogorov-Smirnov distance between the empirical and fitted CDFs.
  double ks = 0.0;

  double cdf(double x) const;
};

/// Quantile with linear interpolation between order statistics
/// (the "type 7" definition). `sorted` must be ascending.
double quantile(std::span<const double> sorted, double p);

/// Exploratory fit used for subband histograms; not part of classification.
/// Lognormal is fitted to |x| + DBL_EPSILON since wavelet coefficients are
/// signed. Needs at least 8 samples.
DistributionFit fit_distribution(std::span<const double> xs, DistributionKind kind);

}  // namespace laserguard::stats
