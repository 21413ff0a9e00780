#pragma once

// Reference solver for the soft-margin SVM dual, written independently of
// the library's SMO:
//
//   max  sum(a) - 1/2 a' Q a,   Q_ij = y_i y_j K_ij
//   s.t. 0 <= a_i <= C,  y' a = 0
//
// Accelerated projected gradient (FISTA with restarts). The projection onto
// the box-and-hyperplane set is found by bisection on the multiplier of the
// equality constraint. The final iterate is polished by solving the KKT
// system on the free set, which makes the bias and decision function exact
// once the active set is right.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace oracle {

struct QpSolution {
  std::vector<double> alpha;
  double bias = 0.0;
  double objective = 0.0;
};

inline double rbf(const std::vector<double>& a, const std::vector<double>& b, double gamma) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return std::exp(-gamma * d);
}

inline double objective(const std::vector<std::vector<double>>& q, const std::vector<double>& a) {
  double lin = 0, quad = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    lin += a[i];
    for (std::size_t j = 0; j < a.size(); ++j) quad += a[i] * q[i][j] * a[j];
  }
  return lin - 0.5 * quad;
}

/// Euclidean projection of v onto {0 <= a <= C, y'a = 0}.
inline std::vector<double> project(const std::vector<double>& v, const std::vector<int>& y, double c) {
  auto at = [&](double lambda) {
    std::vector<double> a(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) a[i] = std::clamp(v[i] - lambda * y[i], 0.0, c);
    return a;
  };
  auto residual = [&](double lambda) {
    double s = 0;
    const auto a = at(lambda);
    for (std::size_t i = 0; i < a.size(); ++i) s += y[i] * a[i];
    return s;  // non-increasing in lambda
  };
  double lo = -1.0, hi = 1.0;
  while (residual(lo) < 0) lo *= 2;
  while (residual(hi) > 0) hi *= 2;
  for (int it = 0; it < 120; ++it) {
    const double mid = 0.5 * (lo + hi);
    (residual(mid) > 0 ? lo : hi) = mid;
  }
  return at(0.5 * (lo + hi));
}

/// Dense Gaussian elimination with partial pivoting; nullopt if singular.
inline std::optional<std::vector<double>> solve(std::vector<std::vector<double>> m, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    if (std::abs(m[piv][col]) < 1e-14) return std::nullopt;
    std::swap(m[piv], m[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = m[r][col] / m[col][col];
      for (std::size_t k = col; k < n; ++k) m[r][k] -= f * m[col][k];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= m[i][k] * x[k];
    x[i] = s / m[i][i];
  }
  return x;
}

inline QpSolution solve_dual(const std::vector<std::vector<double>>& x, const std::vector<int>& y, double c,
                             double gamma, int iterations = 20000) {
  const std::size_t n = x.size();
  std::vector<std::vector<double>> q(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) q[i][j] = y[i] * y[j] * rbf(x[i], x[j], gamma);

  // Lipschitz constant of the gradient: largest eigenvalue of Q (power method).
  std::vector<double> v(n, 1.0);
  double lip = 1.0;
  for (int it = 0; it < 500; ++it) {
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) w[i] += q[i][j] * v[j];
    double norm = 0;
    for (double e : w) norm += e * e;
    norm = std::sqrt(norm);
    if (norm == 0) break;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / norm;
    lip = norm;
  }
  const double step = 1.0 / (lip * 1.01);

  auto grad = [&](const std::vector<double>& a) {
    std::vector<double> g(n, -1.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) g[i] += q[i][j] * a[j];
    return g;  // gradient of the minimization form
  };

  std::vector<double> a(n, 0.0), z = a;
  double t = 1.0;
  double prev_obj = objective(q, a);
  std::vector<double> checkpoint = a;
  for (int it = 0; it < iterations; ++it) {
    if (it % 500 == 499) {
      double moved = 0;
      for (std::size_t i = 0; i < n; ++i) moved = std::max(moved, std::abs(a[i] - checkpoint[i]));
      if (moved < 1e-13 * c) break;
      checkpoint = a;
    }
    const auto g = grad(z);
    std::vector<double> trial(n);
    for (std::size_t i = 0; i < n; ++i) trial[i] = z[i] - step * g[i];
    auto next = project(trial, y, c);
    const double obj = objective(q, next);
    if (obj < prev_obj) {  // restart momentum
      t = 1.0;
      z = a;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t i = 0; i < n; ++i) z[i] = next[i] + ((t - 1.0) / t_next) * (next[i] - a[i]);
    a = std::move(next);
    t = t_next;
    prev_obj = obj;
  }

  // Active-set polish.
  const double eps = 1e-7 * c;
  std::vector<std::size_t> free;
  std::vector<double> fixed(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] <= eps) fixed[i] = 0.0;
    else if (a[i] >= c - eps) fixed[i] = c;
    else free.push_back(i);
  }
  QpSolution out{a, 0.0, objective(q, a)};
  if (!free.empty()) {
    const std::size_t m = free.size();
    std::vector<std::vector<double>> sys(m + 1, std::vector<double>(m + 1, 0.0));
    std::vector<double> rhs(m + 1, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
      const std::size_t i = free[r];
      for (std::size_t s = 0; s < m; ++s) sys[r][s] = q[i][free[s]];
      sys[r][m] = y[i];
      sys[m][r] = y[i];
      rhs[r] = 1.0;
      for (std::size_t j = 0; j < n; ++j)
        if (std::find(free.begin(), free.end(), j) == free.end()) rhs[r] -= q[i][j] * fixed[j];
    }
    for (std::size_t j = 0; j < n; ++j)
      if (std::find(free.begin(), free.end(), j) == free.end()) rhs[m] -= y[j] * fixed[j];
    if (const auto sol = solve(sys, rhs)) {
      std::vector<double> polished = fixed;
      bool ok = true;
      for (std::size_t r = 0; r < m; ++r) {
        polished[free[r]] = (*sol)[r];
        if ((*sol)[r] < -1e-9 || (*sol)[r] > c + 1e-9) ok = false;
      }
      if (ok && objective(q, polished) >= out.objective - 1e-9) {
        out.alpha = polished;
        out.bias = (*sol)[m];
        out.objective = objective(q, polished);
        return out;
      }
    }
  }
  // No free vectors: midpoint of the feasible bias interval.
  double lo = -INFINITY, hi = INFINITY;
  const auto g = grad(out.alpha);
  for (std::size_t i = 0; i < n; ++i) {
    // feasible biases lie between max over I_up and min over I_low of -y_i g_i
    const double v = -y[i] * g[i];
    const bool up = (y[i] > 0 && out.alpha[i] < c) || (y[i] < 0 && out.alpha[i] > 0);
    const bool low = (y[i] > 0 && out.alpha[i] > 0) || (y[i] < 0 && out.alpha[i] < c);
    if (up) lo = std::max(lo, v);
    if (low) hi = std::min(hi, v);
  }
  out.bias = std::isfinite(lo) && std::isfinite(hi) ? 0.5 * (lo + hi) : (std::isfinite(lo) ? lo : hi);
  return out;
}

inline double decision(const QpSolution& s, const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                       double gamma, const std::vector<double>& probe) {
  double f = s.bias;
  for (std::size_t i = 0; i < x.size(); ++i) f += s.alpha[i] * y[i] * rbf(x[i], probe, gamma);
  return f;
}

}  // namespace oracle
