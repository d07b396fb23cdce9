#pragma once

// Independent reference computations used only by tests: explicit Kronecker
// products, finite differences, Gauss quadrature over hat functions, and the
// closed-form scalar recursion.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "qqr/qqr.hpp"

namespace oracle {

using qqr::Index;
using qqr::Matrix;
using qqr::Vector;

inline Matrix kron(const Matrix& X, const Matrix& Y) {
  Matrix K(X.rows() * Y.rows(), X.cols() * Y.cols());
  for (Index i = 0; i < X.rows(); ++i) {
    for (Index j = 0; j < X.cols(); ++j) {
      K.block(i * Y.rows(), j * Y.cols(), Y.rows(), Y.cols()) = X(i, j) * Y;
    }
  }
  return K;
}

inline Matrix identity(Index n) { return Matrix::Identity(n, n); }

/// I_left kron X kron I_right, built entry by entry.
inline Matrix placed(const Matrix& X, Index left, Index right) {
  return kron(kron(identity(left), X), identity(right));
}

/// Sum over the d placements of X (p x n) among n x n identities.
inline Matrix kron_sum(const Matrix& X, int d) {
  const Index n = X.cols();
  Matrix total;
  for (int pos = 0; pos < d; ++pos) {
    Index left = 1, right = 1;
    for (int k = 0; k < pos; ++k) left *= n;
    for (int k = pos + 1; k < d; ++k) right *= n;
    Matrix term = placed(X, left, right);
    if (total.size() == 0) {
      total = term;
    } else {
      total += term;
    }
  }
  return total;
}

inline Vector lift(const Vector& x, int d) {
  Vector out = x;
  for (int k = 1; k < d; ++k) {
    Vector next(out.size() * x.size());
    for (Index i = 0; i < out.size(); ++i) {
      for (Index j = 0; j < x.size(); ++j) next[i * x.size() + j] = out[i] * x[j];
    }
    out = next;
  }
  return out;
}

inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                          double h = 1e-5) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2 * h);
  }
  return g;
}

inline double rel(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale > 0 ? (a - b).norm() / scale : 0.0;
}

inline Matrix random_matrix(std::mt19937_64& gen, Index r, Index c) {
  std::normal_distribution<double> dist;
  Matrix M(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) M(i, j) = dist(gen);
  return M;
}

inline Vector random_vector(std::mt19937_64& gen, Index n) {
  return random_matrix(gen, n, 1).col(0);
}

/// Random matrix shifted so that max Re(lambda) = -1.
inline Matrix random_stable(std::mt19937_64& gen, Index n) {
  Matrix A = random_matrix(gen, n, n);
  const double margin = Eigen::EigenSolver<Matrix>(A).eigenvalues().real().maxCoeff();
  A -= (1.0 + margin) * identity(n);
  return A;
}

/// Least-squares slope of log(y) against log(s).
inline double loglog_slope(const std::vector<double>& s, const std::vector<double>& y) {
  const std::size_t k = s.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += std::log(s[i]);
    my += std::log(y[i]);
  }
  mx /= k;
  my /= k;
  double num = 0, den = 0;
  for (std::size_t i = 0; i < k; ++i) {
    num += (std::log(s[i]) - mx) * (std::log(y[i]) - my);
    den += (std::log(s[i]) - mx) * (std::log(s[i]) - mx);
  }
  return num / den;
}

// Scalar QQR (n = m = 1) solved by hand, degree by degree.
struct ScalarQqr {
  double v2, v3, v4, v5;
  double k1, k2, k3, k4;
  double ac;
};

inline ScalarQqr scalar_qqr(double a, double b, double nq, double q, double r) {
  ScalarQqr s{};
  s.v2 = r * (a + std::sqrt(a * a + b * b * q / r)) / (b * b);
  s.k1 = -b * s.v2 / r;
  s.ac = a + b * s.k1;
  s.v3 = -2 * nq * s.v2 / (3 * s.ac);
  s.k2 = -0.5 * (b / r) * 3 * s.v3;
  const double c4 = -3 * (nq + b * s.k2) * s.v3 - r * s.k2 * s.k2;
  s.v4 = c4 / (4 * s.ac);
  s.k3 = -0.5 * (b / r) * 4 * s.v4;
  const double c5 = -4 * (nq + b * s.k2) * s.v4 - 3 * b * s.k3 * s.v3 - 2 * r * s.k2 * s.k3;
  s.v5 = c5 / (5 * s.ac);
  s.k4 = -0.5 * (b / r) * 5 * s.v5;
  return s;
}

inline qqr::QuadraticSystem scalar_system(double a, double b, double nq, double q, double r) {
  qqr::QuadraticSystem sys;
  sys.A = Matrix::Constant(1, 1, a);
  sys.B = Matrix::Constant(1, 1, b);
  sys.N = Matrix::Constant(1, 1, nq);
  sys.Q2 = Matrix::Constant(1, 1, q);
  sys.R2 = Matrix::Constant(1, 1, r);
  return sys;
}

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
struct GaussRule {
  std::vector<double> nodes, weights;
};

inline GaussRule gauss_legendre(int npts) {
  GaussRule g;
  g.nodes.resize(npts);
  g.weights.resize(npts);
  const double pi = std::acos(-1.0);
  for (int i = 0; i < npts; ++i) {
    double x = std::cos(pi * (i + 0.75) / (npts + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= npts; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = npts * (x * p1 - p0) / (x * x - 1);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    g.nodes[i] = x;
    g.weights[i] = 2 / ((1 - x * x) * dp * dp);
  }
  return g;
}

/// Periodic hat function i on the uniform grid with n cells over [0, 1).
inline double hat(Index n, Index i, double x) {
  const double h = 1.0 / n;
  double t = x / h - static_cast<double>(i);
  t -= n * std::round(t / n);
  return std::max(0.0, 1.0 - std::abs(t));
}

inline double hat_slope(Index n, Index i, double x) {
  const double h = 1.0 / n;
  double t = x / h - static_cast<double>(i);
  t -= n * std::round(t / n);
  if (std::abs(t) >= 1.0) return 0.0;
  return t < 0 ? 1.0 / h : -1.0 / h;
}

/// Integral over [0, 1] of f, composite over the given breakpoints with a
/// 64-point Gauss rule per piece.
inline double integrate(const std::function<double(double)>& f, std::vector<double> breaks) {
  static const GaussRule rule = gauss_legendre(64);
  std::sort(breaks.begin(), breaks.end());
  double total = 0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k], b = breaks[k + 1];
    if (b - a <= 0) continue;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      total += half * rule.weights[q] * f(mid + half * rule.nodes[q]);
    }
  }
  return total;
}

inline std::vector<double> grid_breaks(Index n, Index m) {
  std::vector<double> b;
  for (Index i = 0; i <= n; ++i) b.push_back(static_cast<double>(i) / n);
  for (Index k = 1; k < m; ++k) b.push_back(static_cast<double>(k) / m);
  return b;
}

}  // namespace oracle
