#pragma once
// Compressed Newton search direction
//
//   d = M(Omega) Z(Omega) A^T (y - A x)
//
// where Omega = L_q(A^T r). On Omega, M is (A_Omega^T A_Omega)^{-1} and Z is the
// identity, so d_Omega solves the q x q normal system. Off Omega both matrices
// are diagonal (alpha and gamma), giving d_i = alpha * gamma * g_i.
// M is never formed; the block is solved through a Cholesky factor.

#include "cnt/dense.hpp"
#include "cnt/thresholding.hpp"

#include <stdexcept>

namespace cnt {

struct DirectionParams {
  Index q = 1;
  double alpha = 1.0;
  double gamma = 0.1;  // gamma = 0 is allowed but lies outside the convergence theory
};

struct Direction {
  Vector d;
  SupportSet omega;
  Vector gradient;              // g = A^T r
  double gradient_inner = 0.0;  // -g^T d
  double ridge_applied = 0.0;
};

class DirectionFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void validate(const DirectionParams& p, Index n) {
  detail::require(p.q >= 1 && p.q <= n, "DirectionParams: q must lie in [1, n]");
  detail::require(std::isfinite(p.alpha) && p.alpha > 0.0,
                  "DirectionParams: alpha must be positive");
  detail::require(std::isfinite(p.gamma) && p.gamma >= 0.0,
                  "DirectionParams: gamma must be nonnegative");
}

/// Omega = L_q(grad).
inline SupportSet select_subspace(const Vector& grad, Index q) {
  detail::require(q >= 1 && q <= grad.size(), "select_subspace: q must lie in [1, n]");
  return top_support(grad, q);
}

inline Direction compressed_newton_direction(const SensingMatrix& A, const Vector& residual,
                                             const DirectionParams& params) {
  detail::require(residual.size() == A.rows(),
                  "compressed_newton_direction: residual length mismatch");
  validate(params, A.cols());

  Direction out;
  out.gradient = A.data().transpose() * residual;
  const Vector& g = out.gradient;
  out.omega = select_subspace(g, params.q);
  out.d = (params.alpha * params.gamma) * g;

  if ((g.array() == 0.0).all()) {
    out.d.setZero();
    return out;
  }

  Vector g_omega(out.omega.size());
  for (Index j = 0; j < out.omega.size(); ++j) g_omega[j] = g[out.omega[j]];
  try {
    const CholeskyFactor F = cholesky_spd(gram_on_support(A, out.omega));
    const Vector d_omega = solve_spd(F, g_omega);
    for (Index j = 0; j < out.omega.size(); ++j) out.d[out.omega[j]] = d_omega[j];
    out.ridge_applied = F.ridge_applied;
  } catch (const SingularGramError& e) {
    throw DirectionFailure(std::string("compressed_newton_direction: ") + e.what());
  }
  out.gradient_inner = -g.dot(out.d);
  return out;
}

}  // namespace cnt
