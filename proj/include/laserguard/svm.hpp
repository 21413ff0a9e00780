#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "laserguard/matrix.hpp"

namespace laserguard::svm {

/// +1 is the laser (attack) class, -1 acoustic.
inline constexpr int kLaser = +1;
inline constexpr int kAcoustic = -1;

struct SvmConfig {
  double C = 1.0;
  /// Unset means "scale": gamma = 1 / (dim * variance of all training
  /// entries after standardization).
  std::optional<double> gamma;
  double kkt_tol = 1e-3;
  std::size_t max_iterations = 1'000'000;
  bool standardize = true;

  void validate() const;
};

/// Per-dimension z-score fitted on training rows. Zero-variance dimensions
/// keep std = 1.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> std;

  static Standardizer fit(const Matrix& x);
  std::vector<double> apply(std::span<const double> x) const;
};

struct Prediction {
  int label = kLaser;
  double score = 0.0;
};

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

class SvmModel {
 public:
  SvmModel() = default;
  SvmModel(Matrix support_vectors, std::vector<double> dual_coeffs, double bias, double gamma, double c,
           std::optional<Standardizer> standardizer);

  /// score = sum_i alpha_i y_i K(s_i, z(x)) + b; score == 0 classifies as
  /// laser so the detector fails closed.
  Prediction predict(std::span<const double> x) const;

  std::size_t dim() const noexcept { return sv_.cols(); }
  std::size_t n_support() const noexcept { return sv_.rows(); }
  const Matrix& support_vectors() const noexcept { return sv_; }
  const std::vector<double>& dual_coeffs() const noexcept { return coeffs_; }
  double bias() const noexcept { return bias_; }
  double gamma() const noexcept { return gamma_; }
  double C() const noexcept { return c_; }
  const std::optional<Standardizer>& standardizer() const noexcept { return standardizer_; }

  /// Opaque description of how inputs were featurized (JSON text written
  /// by the caller); stored verbatim in the model file.
  std::string feature_config;

 private:
  Matrix sv_;
  std::vector<double> coeffs_;
  double bias_ = 0.0;
  double gamma_ = 1.0;
  double c_ = 1.0;
  std::optional<Standardizer> standardizer_;
};

struct TrainResult {
  SvmModel model;
  std::vector<double> alpha;  ///< one per training row, in input order
  double dual_objective = 0.0;
  std::size_t iterations = 0;
  bool converged = false;  ///< false when max_iterations was hit
};

/// Dual objective sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij.
double dual_objective(std::span<const double> alpha, std::span<const int> y, const Matrix& kernel);

Matrix kernel_matrix(const Matrix& x, double gamma);

/// Pairwise coordinate ascent on the soft-margin dual with maximal
/// violating pair selection. Exposed so each update can be inspected.
class SmoSolver {
 public:
  SmoSolver(Matrix kernel, std::vector<int> y, double c);

  /// One pair update. Returns false (without changing alpha) once the
  /// largest KKT violation is within tol.
  bool step(double tol);

  /// m(alpha) - M(alpha): zero at the optimum.
  double violation() const;
  double bias() const;

  const std::vector<double>& alpha() const noexcept { return alpha_; }

 private:
  Matrix q_;  // y_i y_j K_ij
  std::vector<int> y_;
  double c_;
  std::vector<double> alpha_;
  std::vector<double> grad_;  // Q alpha - 1

  bool in_up(std::size_t t) const;
  bool in_low(std::size_t t) const;
};

/// Labels must be +1/-1 with both classes present.
TrainResult train(const Matrix& x, std::span<const int> y, const SvmConfig& cfg);

/// Binary, little-endian, length-prefixed. Layout in README.
void save_model(const std::filesystem::path& path, const SvmModel& model);
SvmModel load_model(const std::filesystem::path& path);

std::string serialize(const SvmModel& model);
SvmModel deserialize(std::span<const std::uint8_t> bytes);

inline constexpr std::uint32_t kModelVersion = 1;

}  // namespace laserguard::svm
