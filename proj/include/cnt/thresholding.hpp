#pragma once
// Sparsification operators: hard thresholding H_k and its support L_k, the
// convex relaxation of optimal k-thresholding solved by accelerated projected
// gradient, and an exhaustive binary solver used as a test oracle.

#include "cnt/dense.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

namespace cnt {

struct SparseVector {
  Vector entries;
  SupportSet support;  // exactly the nonzero positions of entries

  SparseVector() = default;
  explicit SparseVector(Vector v) : entries(std::move(v)) {
    std::vector<Index> nz;
    for (Index i = 0; i < entries.size(); ++i) {
      if (entries[i] != 0.0) nz.push_back(i);
    }
    support = SupportSet(std::move(nz), entries.size());
  }

  Index length() const { return entries.size(); }
  Index nnz() const { return support.size(); }
};

namespace detail {

/// First k indices under the order |v| descending, index ascending on ties.
inline std::vector<Index> top_k_indices(const Vector& v, Index k) {
  const Index n = v.size();
  require(k >= 0, "hard_threshold: k must be nonnegative");
  require(k <= n, "hard_threshold: k exceeds vector length");
  require(v.allFinite(), "hard_threshold: entries must be finite");
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  auto before = [&](Index a, Index b) {
    const double ma = std::abs(v[a]);
    const double mb = std::abs(v[b]);
    return ma > mb || (ma == mb && a < b);
  };
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), before);
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace detail

/// L_k(v): indices of the k largest |v_i|, smallest index first on ties.
/// Always has exactly k elements, zeros included if needed.
inline SupportSet top_support(const Vector& v, Index k) {
  return SupportSet(detail::top_k_indices(v, k), v.size());
}

/// H_k(v).
inline SparseVector hard_threshold(const Vector& v, Index k) {
  Vector out = Vector::Zero(v.size());
  for (Index i : detail::top_k_indices(v, k)) out[i] = v[i];
  return SparseVector(std::move(out));
}

/// Restriction of v to S (zero elsewhere).
inline Vector restrict_to(const Vector& v, const SupportSet& S) {
  Vector out = Vector::Zero(v.size());
  for (Index i : S) out[i] = v[i];
  return out;
}

inline Vector indicator(const SupportSet& S, Index n) {
  Vector w = Vector::Zero(n);
  for (Index i : S) w[i] = 1.0;
  return w;
}

struct RelaxedWeights {
  Vector w;
  double objective = 0.0;     // ||y - A (u .* w)||^2
  double kkt_residual = 0.0;  // L * ||w - P(w - grad/L)||, grad of 0.5*||.||^2
  double lipschitz = 0.0;     // final step-size constant L
  int iterations = 0;
  bool converged = false;
};

struct RelaxedOptions {
  double tol = 1e-8;
  int max_iter = 5000;
  /// Feasible starting weights; defaults to the indicator of L_k(u).
  std::optional<Vector> warm_start;
};

/// min_w ||y - A (u .* w)||^2 s.t. sum(w) = k, 0 <= w <= 1.
///
/// FISTA on 0.5 * ||y - B w||^2 with B = A diag(u): the step 1/L starts from a
/// power-iteration estimate of ||B||^2 and is shrunk by backtracking whenever
/// the quadratic upper bound fails. Momentum is reset when the objective
/// increases.
inline RelaxedWeights relaxed_optimal_threshold(const SensingMatrix& A, const Vector& u,
                                                const Vector& y, Index k,
                                                const RelaxedOptions& opt = {}) {
  const Index n = A.cols();
  detail::require(u.size() == n, "relaxed_optimal_threshold: u length mismatch");
  detail::require(y.size() == A.rows(), "relaxed_optimal_threshold: y length mismatch");
  detail::require(k >= 1 && k <= n, "relaxed_optimal_threshold: k out of range");
  detail::require(opt.tol > 0.0, "relaxed_optimal_threshold: tol must be positive");
  detail::require(u.allFinite() && y.allFinite(),
                  "relaxed_optimal_threshold: inputs must be finite");

  RelaxedWeights out;
  Vector w = opt.warm_start ? project_capped_simplex(*opt.warm_start, k)
                            : indicator(top_support(u, k), n);

  if ((u.array() == 0.0).all()) {
    out.w = std::move(w);
    out.objective = y.squaredNorm();
    return out;
  }

  const Matrix B = A.data() * u.asDiagonal();
  double L = std::max(spectral_norm_sq(B, 1e-6, 100), 1e-12);

  auto half_obj = [&](const Vector& Bx) { return 0.5 * (Bx - y).squaredNorm(); };

  Vector Bw = B * w;
  double fw = half_obj(Bw);
  Vector z = w;
  Vector Bz = Bw;
  double t = 1.0;

  int it = 0;
  for (; it < opt.max_iter; ++it) {
    const Vector rz = Bz - y;
    const Vector grad = B.transpose() * rz;
    const double fz = 0.5 * rz.squaredNorm();

    Vector w_new;
    Vector Bw_new;
    double f_new = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      w_new = project_capped_simplex(z - grad / L, k);
      Bw_new = B * w_new;
      f_new = half_obj(Bw_new);
      const Vector d = w_new - z;
      const double model = fz + grad.dot(d) + 0.5 * L * d.squaredNorm();
      if (f_new <= model + 1e-15 * std::max(1.0, std::abs(fz))) break;
      L *= 2.0;
    }

    if (f_new > fw && t > 1.0) {
      // Restart from the last accepted point without momentum.
      t = 1.0;
      z = w;
      Bz = Bw;
      continue;
    }

    const double step = (w_new - w).norm();
    const double scale = std::max(1.0, w.norm());
    const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_new;
    z = w_new + beta * (w_new - w);
    Bz = Bw_new + beta * (Bw_new - Bw);
    w = std::move(w_new);
    Bw = std::move(Bw_new);
    fw = f_new;
    t = t_new;
    if (step <= opt.tol * scale) {
      out.converged = true;
      ++it;
      break;
    }
  }

  const Vector grad_w = B.transpose() * (Bw - y);
  out.kkt_residual = (w - project_capped_simplex(w - grad_w / L, k)).norm() * L;
  out.objective = (y - A.data() * u.cwiseProduct(w)).squaredNorm();
  out.lipschitz = L;
  out.iterations = it;
  out.w = std::move(w);
  return out;
}

struct BinaryThreshold {
  Vector w;  // 0/1 weights with exactly k ones
  double objective = 0.0;
};

/// Exhaustive search over all C(n, k) binary weight vectors. Ties keep the
/// lexicographically smallest support. Refuses n > 20.
inline BinaryThreshold binary_optimal_threshold_bruteforce(const SensingMatrix& A,
                                                           const Vector& u,
                                                           const Vector& y, Index k) {
  const Index n = A.cols();
  detail::require(n <= 20, "binary_optimal_threshold_bruteforce: n > 20 refused");
  detail::require(u.size() == n && y.size() == A.rows(),
                  "binary_optimal_threshold_bruteforce: dimension mismatch");
  detail::require(k >= 0 && k <= n, "binary_optimal_threshold_bruteforce: k out of range");

  std::vector<Index> comb(static_cast<std::size_t>(k));
  std::iota(comb.begin(), comb.end(), Index{0});
  BinaryThreshold best;
  best.objective = std::numeric_limits<double>::infinity();
  const Matrix& M = A.data();
  while (true) {
    Vector r = y;
    for (Index j : comb) r -= u[j] * M.col(j);
    const double obj = r.squaredNorm();
    if (obj < best.objective) {
      best.objective = obj;
      best.w = Vector::Zero(n);
      for (Index j : comb) best.w[j] = 1.0;
    }
    // Next combination in lexicographic order.
    Index i = k - 1;
    while (i >= 0 && comb[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++comb[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k; ++j) {
      comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return best;
}

}  // namespace cnt
