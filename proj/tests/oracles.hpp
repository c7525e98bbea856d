#pragma once
// Independent reference computations used by the tests. Each one takes a
// different route from the library code it checks: explicit loops instead of
// Eigen products, QR/LU instead of Cholesky, full n x n matrices instead of
// the factored direction, grid search instead of bisection.

#include "cnt/dense.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using cnt::Index;
using cnt::Matrix;
using cnt::Vector;

inline Vector matvec(const Matrix& A, const Vector& x) {
  Vector out = Vector::Zero(A.rows());
  for (Index i = 0; i < A.rows(); ++i) {
    long double s = 0.0L;
    for (Index j = 0; j < A.cols(); ++j) s += static_cast<long double>(A(i, j)) * x[j];
    out[i] = static_cast<double>(s);
  }
  return out;
}

inline Matrix gram(const Matrix& A, const std::vector<Index>& S) {
  const auto q = static_cast<Index>(S.size());
  Matrix G(q, q);
  for (Index a = 0; a < q; ++a) {
    for (Index b = 0; b < q; ++b) {
      long double s = 0.0L;
      for (Index i = 0; i < A.rows(); ++i) {
        s += static_cast<long double>(A(i, S[a])) * A(i, S[b]);
      }
      G(a, b) = static_cast<double>(s);
    }
  }
  return G;
}

/// argmin ||y - A_S z|| embedded in R^n, via Householder QR of A_S.
inline Vector least_squares_qr(const Matrix& A, const Vector& y, const std::vector<Index>& S) {
  Matrix AS(A.rows(), static_cast<Index>(S.size()));
  for (std::size_t j = 0; j < S.size(); ++j) AS.col(static_cast<Index>(j)) = A.col(S[j]);
  const Vector z = AS.colPivHouseholderQr().solve(y);
  Vector out = Vector::Zero(A.cols());
  for (std::size_t j = 0; j < S.size(); ++j) out[S[j]] = z[static_cast<Index>(j)];
  return out;
}

/// Indices of the q largest |g| (ties to the smaller index), by full sort.
inline std::vector<Index> top_indices(const Vector& g, Index q) {
  std::vector<Index> idx(static_cast<std::size_t>(g.size()));
  for (Index i = 0; i < g.size(); ++i) idx[static_cast<std::size_t>(i)] = i;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Index a, Index b) { return std::abs(g[a]) > std::abs(g[b]); });
  idx.resize(static_cast<std::size_t>(q));
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// d = M(Omega) Z(Omega) A^T r assembled as explicit n x n matrices, with the
/// Omega block of M obtained by LU inversion of the Gram matrix.
inline Vector dense_direction(const Matrix& A, const Vector& r, Index q, double alpha,
                              double gamma) {
  const Index n = A.cols();
  const Vector g = A.transpose() * r;
  const std::vector<Index> omega = top_indices(g, q);
  std::vector<bool> in(static_cast<std::size_t>(n), false);
  for (Index i : omega) in[static_cast<std::size_t>(i)] = true;

  const Matrix Ginv = gram(A, omega).fullPivLu().inverse();
  Matrix M = Matrix::Zero(n, n);
  for (std::size_t a = 0; a < omega.size(); ++a) {
    for (std::size_t b = 0; b < omega.size(); ++b) {
      M(omega[a], omega[b]) = Ginv(static_cast<Index>(a), static_cast<Index>(b));
    }
  }
  Matrix Z = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    if (!in[static_cast<std::size_t>(i)]) M(i, i) = alpha;
    Z(i, i) = in[static_cast<std::size_t>(i)] ? 1.0 : gamma;
  }
  return M * Z * g;
}

/// Largest eigenvalue of A^T A from a full SVD.
inline double spectral_norm_sq(const Matrix& A) {
  Eigen::JacobiSVD<Matrix> svd(A);
  const double s = svd.singularValues()(0);
  return s * s;
}

inline double capped_sum(const Vector& v, double tau) {
  return (v.array() - tau).max(0.0).min(1.0).sum();
}

/// Projection onto {sum w = k, 0 <= w <= 1}: tau located by scanning a grid
/// of `steps` points over the bracket, then refined by repeated grid
/// subdivision of the bracketing cell.
inline Vector capped_simplex_grid(const Vector& v, Index k, int steps = 2000, int rounds = 6) {
  double lo = v.minCoeff() - 2.0;
  double hi = v.maxCoeff();
  for (int r = 0; r < rounds; ++r) {
    const double h = (hi - lo) / steps;
    double new_lo = lo, new_hi = hi;
    for (int i = 0; i < steps; ++i) {
      const double a = lo + h * i;
      const double b = a + h;
      if (capped_sum(v, a) >= static_cast<double>(k) && capped_sum(v, b) <= static_cast<double>(k)) {
        new_lo = a;
        new_hi = b;
        break;
      }
    }
    lo = new_lo;
    hi = new_hi;
  }
  const double tau = 0.5 * (lo + hi);
  return (v.array() - tau).max(0.0).min(1.0).matrix();
}

/// Minimum of ||y - A (u .* w)||^2 over binary w with exactly k ones, by
/// recursive enumeration (include/exclude) rather than lexicographic order.
inline double binary_optimum(const Matrix& A, const Vector& u, const Vector& y, Index k) {
  const Index n = A.cols();
  double best = std::numeric_limits<double>::infinity();
  std::vector<Index> chosen;
  std::function<void(Index)> rec = [&](Index j) {
    const auto c = static_cast<Index>(chosen.size());
    if (c == k) {
      Vector r = y;
      for (Index i : chosen) r -= u[i] * A.col(i);
      best = std::min(best, r.squaredNorm());
      return;
    }
    if (j == n || n - j < k - c) return;
    chosen.push_back(j);
    rec(j + 1);
    chosen.pop_back();
    rec(j + 1);
  };
  rec(0);
  return best;
}

/// Root of an increasing function on [lo, hi] by plain bisection to width 1e-14.
template <class F>
double bisect(F f, double lo, double hi) {
  while (hi - lo > 1e-14) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline constexpr double phi = std::numbers::phi;

/// sqrt(t) d^2 + 2 d - 1/phi, the CNHT threshold polynomial.
inline double h_cnht(double t, double d) { return std::sqrt(t) * d * d + 2.0 * d - 1.0 / phi; }

/// Spearman rank correlation (average ranks on ties).
inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto x, auto y) { return v[x] < v[y]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      for (std::size_t t = i; t <= j; ++t) r[idx[t]] = 0.5 * static_cast<double>(i + j) + 1.0;
      i = j + 1;
    }
    return r;
  };
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += ra[i], mb += rb[i];
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

}  // namespace oracle
