#include "laserguard/svm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "io_util.hpp"
#include "laserguard/error.hpp"

namespace laserguard::svm {

namespace {

constexpr double kTau = 1e-12;
constexpr char kMagic[8] = {'L', 'G', 'S', 'V', 'M', 'D', 'L', '\0'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  std::string& str() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}
  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) throw Error(ErrorCode::CorruptModel, "model file is truncated");
  }
  std::uint8_t u8() {
    need(1);
    return b_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b_[pos_++]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string text(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return b_.size() - pos_; }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

}  // namespace

void SvmConfig::validate() const {
  if (!(C > 0.0)) throw Error(ErrorCode::InvalidArgument, "C must be positive");
  if (gamma && !(*gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
  if (!(kkt_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "kkt_tol must be positive");
  if (max_iterations == 0) throw Error(ErrorCode::InvalidArgument, "max_iterations must be positive");
}

Standardizer Standardizer::fit(const Matrix& x) {
  Standardizer s;
  const std::size_t d = x.cols();
  const double n = static_cast<double>(x.rows());
  s.mean.assign(d, 0.0);
  s.std.assign(d, 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < d; ++c) s.mean[c] += x(r, c);
  }
  for (double& m : s.mean) m /= n;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < d; ++c) s.std[c] += (x(r, c) - s.mean[c]) * (x(r, c) - s.mean[c]);
  }
  for (double& v : s.std) {
    v = std::sqrt(v / n);
    if (!(v > 0.0)) v = 1.0;
  }
  return s;
}

std::vector<double> Standardizer::apply(std::span<const double> x) const {
  std::vector<double> z(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) z[c] = (x[c] - mean[c]) / std[c];
  return z;
}

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

SvmModel::SvmModel(Matrix support_vectors, std::vector<double> dual_coeffs, double bias, double gamma,
                   double c, std::optional<Standardizer> standardizer)
    : sv_(std::move(support_vectors)),
      coeffs_(std::move(dual_coeffs)),
      bias_(bias),
      gamma_(gamma),
      c_(c),
      standardizer_(std::move(standardizer)) {
  if (coeffs_.size() != sv_.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "one dual coefficient per support vector required");
  }
  if (standardizer_ && (standardizer_->mean.size() != sv_.cols() || standardizer_->std.size() != sv_.cols())) {
    throw Error(ErrorCode::DimensionMismatch, "standardizer dimension differs from support vectors");
  }
}

Prediction SvmModel::predict(std::span<const double> x) const {
  if (x.size() != dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "model expects " + std::to_string(dim()) + " features, got " + std::to_string(x.size()));
  }
  std::vector<double> z = standardizer_ ? standardizer_->apply(x) : std::vector<double>(x.begin(), x.end());
  double score = bias_;
  for (std::size_t i = 0; i < sv_.rows(); ++i) score += coeffs_[i] * rbf_kernel(sv_.row(i), z, gamma_);
  return {score >= 0.0 ? kLaser : kAcoustic, score};
}

Matrix kernel_matrix(const Matrix& x, double gamma) {
  Matrix k(x.rows(), x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    k(i, i) = 1.0;
    for (std::size_t j = i + 1; j < x.rows(); ++j) {
      k(i, j) = k(j, i) = rbf_kernel(x.row(i), x.row(j), gamma);
    }
  }
  return k;
}

double dual_objective(std::span<const double> alpha, std::span<const int> y, const Matrix& kernel) {
  double linear = 0.0;
  double quad = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    linear += alpha[i];
    if (alpha[i] == 0.0) continue;
    for (std::size_t j = 0; j < alpha.size(); ++j) {
      quad += alpha[i] * alpha[j] * y[i] * y[j] * kernel(i, j);
    }
  }
  return linear - 0.5 * quad;
}

SmoSolver::SmoSolver(Matrix kernel, std::vector<int> y, double c)
    : q_(std::move(kernel)), y_(std::move(y)), c_(c), alpha_(y_.size(), 0.0), grad_(y_.size(), -1.0) {
  for (std::size_t i = 0; i < y_.size(); ++i) {
    for (std::size_t j = 0; j < y_.size(); ++j) q_(i, j) *= y_[i] * y_[j];
  }
}

bool SmoSolver::in_up(std::size_t t) const {
  return (y_[t] > 0 && alpha_[t] < c_) || (y_[t] < 0 && alpha_[t] > 0.0);
}

bool SmoSolver::in_low(std::size_t t) const {
  return (y_[t] > 0 && alpha_[t] > 0.0) || (y_[t] < 0 && alpha_[t] < c_);
}

double SmoSolver::violation() const {
  double m = -std::numeric_limits<double>::infinity();
  double big_m = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < y_.size(); ++t) {
    const double v = -y_[t] * grad_[t];
    if (in_up(t)) m = std::max(m, v);
    if (in_low(t)) big_m = std::min(big_m, v);
  }
  return m - big_m;
}

bool SmoSolver::step(double tol) {
  const std::size_t n = y_.size();
  std::size_t i = n;
  std::size_t j = n;
  double g_max = -std::numeric_limits<double>::infinity();
  double g_min = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < n; ++t) {
    const double v = -y_[t] * grad_[t];
    if (in_up(t) && v > g_max) {
      g_max = v;
      i = t;
    }
    if (in_low(t) && v < g_min) {
      g_min = v;
      j = t;
    }
  }
  if (i == n || j == n || g_max - g_min < tol) return false;

  const double old_ai = alpha_[i];
  const double old_aj = alpha_[j];
  double& ai = alpha_[i];
  double& aj = alpha_[j];

  if (y_[i] != y_[j]) {
    double quad = q_(i, i) + q_(j, j) + 2.0 * q_(i, j);
    if (quad <= 0.0) quad = kTau;
    const double delta = (-grad_[i] - grad_[j]) / quad;
    const double diff = ai - aj;
    ai += delta;
    aj += delta;
    if (diff > 0.0) {
      if (aj < 0.0) {
        aj = 0.0;
        ai = diff;
      }
    } else if (ai < 0.0) {
      ai = 0.0;
      aj = -diff;
    }
    if (diff > 0.0) {
      if (ai > c_) {
        ai = c_;
        aj = c_ - diff;
      }
    } else if (aj > c_) {
      aj = c_;
      ai = c_ + diff;
    }
  } else {
    double quad = q_(i, i) + q_(j, j) - 2.0 * q_(i, j);
    if (quad <= 0.0) quad = kTau;
    const double delta = (grad_[i] - grad_[j]) / quad;
    const double sum = ai + aj;
    ai -= delta;
    aj += delta;
    if (sum > c_) {
      if (ai > c_) {
        ai = c_;
        aj = sum - c_;
      }
    } else if (aj < 0.0) {
      aj = 0.0;
      ai = sum;
    }
    if (sum > c_) {
      if (aj > c_) {
        aj = c_;
        ai = sum - c_;
      }
    } else if (ai < 0.0) {
      ai = 0.0;
      aj = sum;
    }
  }

  const double dai = ai - old_ai;
  const double daj = aj - old_aj;
  for (std::size_t t = 0; t < n; ++t) grad_[t] += q_(t, i) * dai + q_(t, j) * daj;
  return true;
}

double SmoSolver::bias() const {
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < y_.size(); ++t) {
    const double yg = y_[t] * grad_[t];
    if (alpha_[t] >= c_) {
      if (y_[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha_[t] <= 0.0) {
      if (y_[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      free_sum += yg;
      ++n_free;
    }
  }
  const double rho = n_free > 0 ? free_sum / static_cast<double>(n_free) : 0.5 * (ub + lb);
  return -rho;
}

TrainResult train(const Matrix& x, std::span<const int> y, const SvmConfig& cfg) {
  cfg.validate();
  if (x.rows() != y.size()) {
    throw Error(ErrorCode::DimensionMismatch, "feature rows and labels differ in count");
  }
  if (x.cols() == 0) throw Error(ErrorCode::DimensionMismatch, "feature vectors are empty");
  bool has_pos = false;
  bool has_neg = false;
  for (int label : y) {
    if (label == kLaser) has_pos = true;
    else if (label == kAcoustic) has_neg = true;
    else throw Error(ErrorCode::InvalidArgument, "labels must be +1 or -1");
  }
  if (!has_pos || !has_neg) throw Error(ErrorCode::SingleClassData, "training data has a single class");
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteFeature, "training matrix has NaN or inf");
  }

  std::optional<Standardizer> standardizer;
  Matrix z = x;
  if (cfg.standardize) {
    standardizer = Standardizer::fit(x);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const auto s = standardizer->apply(x.row(r));
      std::copy(s.begin(), s.end(), z.row(r).begin());
    }
  }

  double gamma = 0.0;
  if (cfg.gamma) {
    gamma = *cfg.gamma;
  } else {
    const double n = static_cast<double>(z.data().size());
    double mean = 0.0;
    for (double v : z.data()) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : z.data()) var += (v - mean) * (v - mean);
    var /= n;
    gamma = var > 0.0 ? 1.0 / (static_cast<double>(z.cols()) * var) : 1.0;
  }

  Matrix kernel = kernel_matrix(z, gamma);
  std::vector<int> labels(y.begin(), y.end());
  SmoSolver solver(kernel, labels, cfg.C);

  TrainResult result;
  while (result.iterations < cfg.max_iterations && solver.step(cfg.kkt_tol)) ++result.iterations;
  result.converged = solver.violation() < cfg.kkt_tol;
  result.alpha = solver.alpha();
  result.dual_objective = dual_objective(result.alpha, labels, kernel);

  std::size_t n_sv = 0;
  for (double a : result.alpha) n_sv += a > 0.0 ? 1 : 0;
  Matrix sv(n_sv, z.cols());
  std::vector<double> coeffs;
  coeffs.reserve(n_sv);
  for (std::size_t i = 0, r = 0; i < result.alpha.size(); ++i) {
    if (result.alpha[i] <= 0.0) continue;
    std::copy(z.row(i).begin(), z.row(i).end(), sv.row(r++).begin());
    coeffs.push_back(result.alpha[i] * labels[i]);
  }
  result.model = SvmModel(std::move(sv), std::move(coeffs), solver.bias(), gamma, cfg.C, std::move(standardizer));
  return result;
}

std::string serialize(const SvmModel& model) {
  if (model.n_support() == 0) {
    throw Error(ErrorCode::InvalidArgument, "refusing to save a model without support vectors");
  }
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kModelVersion);
  w.u32(static_cast<std::uint32_t>(model.feature_config.size()));
  w.bytes(model.feature_config.data(), model.feature_config.size());
  w.u32(static_cast<std::uint32_t>(model.dim()));
  w.f64(model.gamma());
  w.f64(model.C());
  w.f64(model.bias());
  const auto& st = model.standardizer();
  w.u8(st ? 1 : 0);
  if (st) {
    for (double v : st->mean) w.f64(v);
    for (double v : st->std) w.f64(v);
  }
  w.u32(static_cast<std::uint32_t>(model.n_support()));
  for (std::size_t i = 0; i < model.n_support(); ++i) {
    w.f64(model.dual_coeffs()[i]);
    for (double v : model.support_vectors().row(i)) w.f64(v);
  }
  w.u64(detail::fnv1a(w.str()));
  return std::move(w.str());
}

SvmModel deserialize(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.need(sizeof kMagic);
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw Error(ErrorCode::CorruptModel, "bad magic; not a model file");
  }
  r.text(sizeof kMagic);
  const std::uint32_t version = r.u32();
  if (version != kModelVersion) {
    throw Error(ErrorCode::VersionMismatch,
                "model version " + std::to_string(version) + ", expected " + std::to_string(kModelVersion));
  }
  if (bytes.size() < 8) throw Error(ErrorCode::CorruptModel, "model file is truncated");
  const std::size_t body = bytes.size() - 8;
  std::uint64_t stored = 0;
  for (int i = 0; i < 8; ++i) stored |= static_cast<std::uint64_t>(bytes[body + i]) << (8 * i);
  const std::string_view payload(reinterpret_cast<const char*>(bytes.data()), body);
  if (detail::fnv1a(payload) != stored) throw Error(ErrorCode::CorruptModel, "checksum mismatch");

  Reader in(bytes.first(body));
  in.text(sizeof kMagic);
  in.u32();
  std::string feature_config = in.text(in.u32());
  const std::uint32_t dim = in.u32();
  const double gamma = in.f64();
  const double c = in.f64();
  const double bias = in.f64();
  std::optional<Standardizer> st;
  if (in.u8() != 0) {
    Standardizer s;
    s.mean.resize(dim);
    s.std.resize(dim);
    for (auto& v : s.mean) v = in.f64();
    for (auto& v : s.std) v = in.f64();
    st = std::move(s);
  }
  const std::uint32_t n_sv = in.u32();
  if (n_sv == 0 || dim == 0) throw Error(ErrorCode::CorruptModel, "model has no support vectors");
  in.need(static_cast<std::size_t>(n_sv) * (dim + 1) * 8);
  Matrix sv(n_sv, dim);
  std::vector<double> coeffs(n_sv);
  for (std::uint32_t i = 0; i < n_sv; ++i) {
    coeffs[i] = in.f64();
    for (auto& v : sv.row(i)) v = in.f64();
  }
  if (in.remaining() != 0) throw Error(ErrorCode::CorruptModel, "trailing bytes after support vectors");
  SvmModel model(std::move(sv), std::move(coeffs), bias, gamma, c, std::move(st));
  model.feature_config = std::move(feature_config);
  return model;
}

void save_model(const std::filesystem::path& path, const SvmModel& model) {
  detail::write_file_atomic(path, serialize(model));
}

SvmModel load_model(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) throw Error(ErrorCode::NotFound, path.string());
  const auto bytes = detail::read_file_bytes(path);
  return deserialize(bytes);
}

}  // namespace laserguard::svm
