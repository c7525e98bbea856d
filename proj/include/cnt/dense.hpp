#pragma once
// Dense linear-algebra kernels shared by every solver: support-restricted
// Gram matrices, Cholesky solves, least squares on a column subset, power
// iteration for the spectral norm and projection onto the capped simplex.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cnt {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a Gram matrix cannot be factored even after the ridge retry.
class SingularGramError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

inline bool all_finite(const Eigen::Ref<const Matrix>& m) {
  return m.allFinite();
}

}  // namespace detail

/// Dense m x n measurement matrix. Eigen's default column-major layout keeps
/// each column contiguous, so gathering A_S is a column copy.
class SensingMatrix {
 public:
  SensingMatrix() = default;

  explicit SensingMatrix(Matrix data) : data_(std::move(data)) {
    detail::require(data_.rows() >= 1 && data_.cols() >= 1,
                    "SensingMatrix: rows and cols must be >= 1");
    detail::require(detail::all_finite(data_),
                    "SensingMatrix: entries must be finite");
  }

  Index rows() const { return data_.rows(); }
  Index cols() const { return data_.cols(); }
  const Matrix& data() const { return data_; }
  auto col(Index j) const { return data_.col(j); }

  friend bool operator==(const SensingMatrix& a, const SensingMatrix& b) {
    return a.data_.rows() == b.data_.rows() && a.data_.cols() == b.data_.cols() &&
           a.data_ == b.data_;
  }

 private:
  Matrix data_;
};

/// Strictly increasing list of column indices in [0, n).
class SupportSet {
 public:
  SupportSet() = default;

  /// Indices must already be sorted and unique.
  SupportSet(std::vector<Index> indices, Index n) : indices_(std::move(indices)) {
    detail::require(static_cast<Index>(indices_.size()) <= n,
                    "SupportSet: cardinality exceeds n");
    for (std::size_t i = 0; i < indices_.size(); ++i) {
      detail::require(indices_[i] >= 0 && indices_[i] < n,
                      "SupportSet: index out of range");
      if (i > 0) {
        detail::require(indices_[i - 1] < indices_[i],
                        "SupportSet: indices must be strictly increasing");
      }
    }
  }

  static SupportSet from_unsorted(std::vector<Index> indices, Index n) {
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    return SupportSet(std::move(indices), n);
  }

  const std::vector<Index>& indices() const { return indices_; }
  Index size() const { return static_cast<Index>(indices_.size()); }
  bool empty() const { return indices_.empty(); }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }
  Index operator[](Index i) const { return indices_[static_cast<std::size_t>(i)]; }

  bool contains(Index i) const {
    return std::binary_search(indices_.begin(), indices_.end(), i);
  }

  friend bool operator==(const SupportSet&, const SupportSet&) = default;

 private:
  std::vector<Index> indices_;
};

inline SupportSet set_union(const SupportSet& a, const SupportSet& b, Index n) {
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(a.size() + b.size()));
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return SupportSet(std::move(out), n);
}

struct CholeskyFactor {
  Index dim = 0;
  Matrix lower;
  double ridge_applied = 0.0;
};

inline Vector matvec(const SensingMatrix& A, const Vector& x) {
  detail::require(x.size() == A.cols(), "matvec: dimension mismatch");
  detail::require(x.allFinite(), "matvec: x must be finite");
  return A.data() * x;
}

/// A_S as a dense m x |S| matrix.
inline Matrix gather_columns(const SensingMatrix& A, const SupportSet& S) {
  Matrix out(A.rows(), S.size());
  for (Index j = 0; j < S.size(); ++j) out.col(j) = A.col(S[j]);
  return out;
}

inline Matrix gram_on_support(const SensingMatrix& A, const SupportSet& S) {
  detail::require(!S.empty(), "gram_on_support: empty support");
  detail::require(S.indices().back() < A.cols(), "gram_on_support: index out of range");
  const Matrix AS = gather_columns(A, S);
  Matrix G = AS.transpose() * AS;
  // Exact symmetry; the product is symmetric only up to rounding.
  G = (0.5 * (G + G.transpose())).eval();
  return G;
}

/// Cholesky factorization with a single ridge retry of
/// 1e-10 * trace(G) / dim on pivot failure.
inline CholeskyFactor cholesky_spd(const Matrix& G) {
  detail::require(G.rows() == G.cols() && G.rows() >= 1,
                  "cholesky_spd: matrix must be square and non-empty");
  detail::require(G.allFinite(), "cholesky_spd: entries must be finite");
  const Index dim = G.rows();

  auto attempt = [&](const Matrix& M, CholeskyFactor& out) {
    Eigen::LLT<Matrix> llt(M);
    if (llt.info() != Eigen::Success) return false;
    Matrix L = llt.matrixL();
    if (!L.allFinite() || (L.diagonal().array() <= 0.0).any()) return false;
    out.lower = std::move(L);
    return true;
  };

  CholeskyFactor f;
  f.dim = dim;
  if (attempt(G, f)) return f;

  const double ridge = 1e-10 * (G.trace() / static_cast<double>(dim));
  if (ridge > 0.0) {
    Matrix R = G;
    R.diagonal().array() += ridge;
    if (attempt(R, f)) {
      f.ridge_applied = ridge;
      return f;
    }
  }
  throw SingularGramError("cholesky_spd: Gram matrix is singular even with ridge");
}

inline Vector solve_spd(const CholeskyFactor& F, const Vector& b) {
  detail::require(b.size() == F.dim, "solve_spd: dimension mismatch");
  const auto L = F.lower.triangularView<Eigen::Lower>();
  Vector z = L.solve(b);
  L.transpose().solveInPlace(z);
  return z;
}

/// argmin ||y - A z|| over z supported on S; zero outside S.
inline Vector least_squares_on_support(const SensingMatrix& A, const Vector& y,
                                       const SupportSet& S) {
  detail::require(y.size() == A.rows(), "least_squares_on_support: y length mismatch");
  detail::require(y.allFinite(), "least_squares_on_support: y must be finite");
  const Matrix AS = gather_columns(A, S);
  const Matrix G = gram_on_support(A, S);
  const CholeskyFactor F = cholesky_spd(G);
  const Vector zs = solve_spd(F, AS.transpose() * y);
  Vector z = Vector::Zero(A.cols());
  for (Index j = 0; j < S.size(); ++j) z[S[j]] = zs[j];
  return z;
}

/// Power iteration on B^T B. The Rayleigh quotient never exceeds the true
/// value, so callers that need an upper bound must verify descent themselves.
inline double spectral_norm_sq(const Matrix& B, double tol, int max_iter) {
  detail::require(tol > 0.0, "spectral_norm_sq: tol must be positive");
  if (B.size() == 0) return 0.0;
  Vector v = Vector::Ones(B.cols()) / std::sqrt(static_cast<double>(B.cols()));
  double estimate = 0.0;
  for (int it = 0; it < std::max(max_iter, 1); ++it) {
    const Vector Bv = B * v;
    const double next = Bv.squaredNorm();
    Vector w = B.transpose() * Bv;
    const double wn = w.norm();
    if (wn == 0.0) return next;
    v = w / wn;
    if (it > 0 && std::abs(next - estimate) <= tol * std::max(next, 1e-300)) {
      return next;
    }
    estimate = next;
  }
  return estimate;
}

inline double spectral_norm_sq(const SensingMatrix& B, double tol, int max_iter) {
  return spectral_norm_sq(B.data(), tol, max_iter);
}

namespace detail {

inline double capped_mass(const Vector& v, double tau) {
  return (v.array() - tau).max(0.0).min(1.0).sum();
}

}  // namespace detail

/// Euclidean projection onto {w : sum(w) = k, 0 <= w <= 1}. The solution is
/// w_i = clamp(v_i - tau, 0, 1); tau is bracketed and bisected, then
/// recomputed exactly from the free coordinates it identifies.
inline Vector project_capped_simplex(const Vector& v, Index k) {
  const Index n = v.size();
  detail::require(n >= 1, "project_capped_simplex: empty vector");
  detail::require(k >= 1, "project_capped_simplex: k must be >= 1");
  detail::require(k <= n, "project_capped_simplex: k exceeds n");
  detail::require(v.allFinite(), "project_capped_simplex: v must be finite");
  if (k == n) return Vector::Ones(n);

  const double target = static_cast<double>(k);
  // mass(lo) = n >= k, mass(hi) = 0 <= k; mass is nonincreasing in tau.
  double lo = v.minCoeff() - 1.0;
  double hi = v.maxCoeff();
  double tau = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    tau = 0.5 * (lo + hi);
    if (tau <= lo || tau >= hi) break;
    const double s = detail::capped_mass(v, tau);
    if (s > target) {
      lo = tau;
    } else if (s < target) {
      hi = tau;
    } else {
      break;
    }
  }

  // Exact tau from the free set at the bisected point.
  double free_sum = 0.0;
  Index n_free = 0;
  Index n_upper = 0;
  for (Index i = 0; i < n; ++i) {
    const double t = v[i] - tau;
    if (t >= 1.0) {
      ++n_upper;
    } else if (t > 0.0) {
      free_sum += v[i];
      ++n_free;
    }
  }
  if (n_free > 0) {
    const double exact =
        (free_sum + static_cast<double>(n_upper) - target) / static_cast<double>(n_free);
    const double err_exact = std::abs(detail::capped_mass(v, exact) - target);
    const double err_bisect = std::abs(detail::capped_mass(v, tau) - target);
    if (err_exact <= err_bisect) tau = exact;
  }
  return (v.array() - tau).max(0.0).min(1.0).matrix();
}

}  // namespace cnt
