#pragma once
// Thresholding solvers for min ||y - A x||^2 s.t. ||x||_0 <= k.
//
// Compressed Newton family, all of the form u = x + lambda * d_CN:
//   CNHT   x+ = H_k(u)
//   CNHTP  x+ = least squares on L_k(u)
//   CNOT   w  = relaxed optimal k-thresholding of u,  x+ = H_k(w .* u)
//   CNOTP  as CNOT, then least squares on L_k(w .* u)
// Baselines:
//   IHT    x+ = H_k(x + lambda A^T r)
//   HTP    least squares on L_k(x + lambda A^T r)
//   SP     subspace pursuit: merge L_k(A^T r) into the current support,
//          refit, prune to k, refit.

#include "cnt/dense.hpp"
#include "cnt/newton_direction.hpp"
#include "cnt/probgen.hpp"
#include "cnt/thresholding.hpp"

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cnt {

enum class Algorithm { CNHT, CNHTP, CNOT, CNOTP, IHT, HTP, SP };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::CNHT, Algorithm::CNHTP,
                                               Algorithm::CNOT, Algorithm::CNOTP,
                                               Algorithm::IHT,  Algorithm::HTP,
                                               Algorithm::SP};

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::CNHT: return "cnht";
    case Algorithm::CNHTP: return "cnhtp";
    case Algorithm::CNOT: return "cnot";
    case Algorithm::CNOTP: return "cnotp";
    case Algorithm::IHT: return "iht";
    case Algorithm::HTP: return "htp";
    case Algorithm::SP: return "sp";
  }
  return "?";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view s) {
  for (Algorithm a : kAllAlgorithms) {
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

inline bool uses_newton_direction(Algorithm a) {
  return a == Algorithm::CNHT || a == Algorithm::CNHTP || a == Algorithm::CNOT ||
         a == Algorithm::CNOTP;
}

inline bool uses_pursuit(Algorithm a) {
  return a == Algorithm::CNHTP || a == Algorithm::CNOTP || a == Algorithm::HTP ||
         a == Algorithm::SP;
}

inline bool uses_relaxed_ot(Algorithm a) {
  return a == Algorithm::CNOT || a == Algorithm::CNOTP;
}

enum class Termination {
  converged_iterate,
  converged_residual,
  reached_target,
  max_iter,
  direction_failure
};

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::converged_iterate: return "converged_iterate";
    case Termination::converged_residual: return "converged_residual";
    case Termination::reached_target: return "reached_target";
    case Termination::max_iter: return "max_iter";
    case Termination::direction_failure: return "direction_failure";
  }
  return "?";
}

struct SolverConfig {
  Index k = 1;
  DirectionParams direction{};
  double lambda = 1.0;
  int max_iter = 30;
  double tol_rel_iterate = 1e-8;
  /// Stop once ||y - A x|| <= tol_residual * ||y||.
  double tol_residual = 1e-12;
  Algorithm algorithm = Algorithm::CNHTP;
  /// Inner relaxed-OT solve (CNOT, CNOTP).
  double qp_tol = 1e-8;
  int qp_max_iter = 5000;
  /// Start each relaxed-OT solve from the previous outer iteration's weights.
  bool qp_warm_start = true;
};

/// Checks the config against an m x n problem. q is clamped to min(q, m, n);
/// every adjustment or out-of-range recommendation is returned as a warning.
inline std::vector<std::string> validate(SolverConfig& c, Index m, Index n) {
  std::vector<std::string> warnings;
  detail::require(c.k >= 1 && c.k <= std::min(m, n), "SolverConfig: k must lie in [1, min(m, n)]");
  detail::require(std::isfinite(c.lambda) && c.lambda > 0.0, "SolverConfig: lambda must be positive");
  detail::require(c.max_iter >= 1, "SolverConfig: max_iter must be >= 1");
  detail::require(c.tol_rel_iterate >= 0.0 && c.tol_residual >= 0.0,
                  "SolverConfig: tolerances must be nonnegative");
  detail::require(c.qp_tol > 0.0 && c.qp_max_iter >= 1, "SolverConfig: invalid QP budget");
  if (!uses_newton_direction(c.algorithm)) return warnings;

  detail::require(c.direction.q >= c.k, "SolverConfig: q must be >= k");
  const Index cap = std::min(m, n);
  if (c.direction.q > cap) {
    warnings.push_back("q=" + std::to_string(c.direction.q) + " clamped to " +
                       std::to_string(cap) + " (q cannot exceed min(m, n))");
    c.direction.q = cap;
  }
  if (c.direction.q > 2 * c.k) {
    warnings.push_back("q=" + std::to_string(c.direction.q) +
                       " exceeds 2k; recommended range is [k, 2k]");
  }
  validate(c.direction, n);
  if (c.direction.gamma == 0.0) {
    warnings.push_back("gamma=0 lies outside the convergence theory");
  }
  return warnings;
}

struct IterateState {
  SparseVector x;
  Vector residual;
  double objective = 0.0;
  int iteration = 0;
};

struct RunReport {
  IterateState final;
  std::vector<double> objective_history;  // entry 0 is the starting point
  std::optional<std::vector<double>> rel_error_history;
  /// Objective of the thresholded vector before the least-squares refit, per
  /// iteration (pursuit algorithms only).
  std::vector<double> pre_pursuit_objective_history;
  /// Relaxed-OT objective per iteration (CNOT, CNOTP only).
  std::vector<double> qp_objective_history;
  int iterations_used = 0;
  std::optional<bool> success;
  double wall_time_ms = 0.0;
  Termination termination = Termination::max_iter;
  std::string diagnostic;
};

struct RunOptions {
  /// Test hook: start from this k-sparse point instead of x = 0.
  std::optional<Vector> initial;
  /// Relative-error level used to judge success when truth is known.
  double success_tol = 1e-3;
  /// Also stop as soon as the relative error reaches success_tol.
  bool stop_at_success = false;
};

inline double relative_error(const Vector& x, const SparseVector& truth) {
  const double tn = truth.entries.norm();
  detail::require(tn > 0.0, "relative_error: truth must be nonzero");
  return (x - truth.entries).norm() / tn;
}

namespace detail {

/// One evaluation order for y - Ax, so recorded objectives compare exactly.
inline Vector residual(const SensingMatrix& A, const Vector& y, const Vector& x) {
  Vector r = y;
  r.noalias() -= A.data() * x;
  return r;
}

struct PursuitResult {
  Vector x;
  double pre_objective;
};

/// Least squares on S, unless the thresholded candidate itself already does
/// at least as well (it is feasible for the same problem).
inline PursuitResult pursuit(const SensingMatrix& A, const Vector& y, const SupportSet& S,
                             const Vector& candidate) {
  PursuitResult out;
  out.pre_objective = residual(A, y, candidate).squaredNorm();
  Vector z = least_squares_on_support(A, y, S);
  const double post = residual(A, y, z).squaredNorm();
  out.x = post <= out.pre_objective ? std::move(z) : candidate;
  return out;
}

}  // namespace detail

/// Runs config.algorithm on the instance.
inline RunReport run(const Instance& inst, SolverConfig config, const RunOptions& opts = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const SensingMatrix& A = inst.A;
  const Vector& y = inst.y;
  const Index m = A.rows();
  const Index n = A.cols();
  detail::require(y.size() == m, "run: y length mismatch");
  validate(config, m, n);
  const Index k = config.k;
  const Algorithm algo = config.algorithm;

  Vector x = Vector::Zero(n);
  if (opts.initial) {
    detail::require(opts.initial->size() == n, "run: initial point length mismatch");
    detail::require((opts.initial->array() != 0.0).count() <= k, "run: initial point must be k-sparse");
    x = *opts.initial;
  }

  RunReport rep;
  const bool have_truth = inst.truth.has_value();
  if (have_truth) rep.rel_error_history.emplace();

  Vector r = detail::residual(A, y, x);
  auto record = [&](const Vector& xv, const Vector& rv) {
    rep.objective_history.push_back(rv.squaredNorm());
    if (have_truth) rep.rel_error_history->push_back(relative_error(xv, *inst.truth));
  };
  record(x, r);

  const double y_norm = y.norm();
  std::optional<Vector> qp_weights;
  std::optional<SupportSet> sp_support;

  auto newton_point = [&](const Vector& xv, const Vector& rv) -> Vector {
    const Direction dir = compressed_newton_direction(A, rv, config.direction);
    return xv + config.lambda * dir.d;
  };

  auto relaxed_point = [&](const Vector& u) -> Vector {
    RelaxedOptions qo;
    qo.tol = config.qp_tol;
    qo.max_iter = config.qp_max_iter;
    if (config.qp_warm_start && qp_weights) qo.warm_start = qp_weights;
    RelaxedWeights rw = relaxed_optimal_threshold(A, u, y, k, qo);
    rep.qp_objective_history.push_back(rw.objective);
    Vector wu = rw.w.cwiseProduct(u);
    qp_weights = std::move(rw.w);
    return wu;
  };

  auto pursue = [&](const Vector& v) -> Vector {
    const SparseVector cand = hard_threshold(v, k);
    auto pr = detail::pursuit(A, y, top_support(v, k), cand.entries);
    rep.pre_pursuit_objective_history.push_back(pr.pre_objective);
    return std::move(pr.x);
  };

  auto step = [&](const Vector& xv, const Vector& rv) -> Vector {
    switch (algo) {
      case Algorithm::CNHT: return hard_threshold(newton_point(xv, rv), k).entries;
      case Algorithm::CNHTP: return pursue(newton_point(xv, rv));
      case Algorithm::CNOT: return hard_threshold(relaxed_point(newton_point(xv, rv)), k).entries;
      case Algorithm::CNOTP: return pursue(relaxed_point(newton_point(xv, rv)));
      case Algorithm::IHT:
        return hard_threshold(xv + config.lambda * (A.data().transpose() * rv), k).entries;
      case Algorithm::HTP: return pursue(xv + config.lambda * (A.data().transpose() * rv));
      case Algorithm::SP: {
        const Vector g = A.data().transpose() * rv;
        SupportSet cand = top_support(g, k);
        if (sp_support) cand = set_union(*sp_support, cand, n);
        const Vector b = least_squares_on_support(A, y, cand);
        SupportSet pruned = top_support(b, k);
        Vector z = least_squares_on_support(A, y, pruned);
        sp_support = std::move(pruned);
        return z;
      }
    }
    return xv;
  };

  rep.termination = Termination::max_iter;
  int p = 0;
  for (; p < config.max_iter; ++p) {
    Vector x_next;
    try {
      x_next = step(x, r);
    } catch (const DirectionFailure& e) {
      rep.termination = Termination::direction_failure;
      rep.diagnostic = e.what();
      break;
    } catch (const SingularGramError& e) {
      rep.termination = Termination::direction_failure;
      rep.diagnostic = e.what();
      break;
    }
    const double change = (x_next - x).norm();
    const double scale = std::max(1.0, x.norm());
    x = std::move(x_next);
    r = detail::residual(A, y, x);
    record(x, r);

    if (change <= config.tol_rel_iterate * scale) {
      rep.termination = Termination::converged_iterate;
      ++p;
      break;
    }
    if (r.norm() <= config.tol_residual * y_norm) {
      rep.termination = Termination::converged_residual;
      ++p;
      break;
    }
    if (opts.stop_at_success && have_truth &&
        rep.rel_error_history->back() <= opts.success_tol) {
      rep.termination = Termination::reached_target;
      ++p;
      break;
    }
  }

  rep.iterations_used = p;
  rep.final.x = SparseVector(x);
  rep.final.objective = r.squaredNorm();
  rep.final.residual = std::move(r);
  rep.final.iteration = p;
  if (have_truth) rep.success = rep.rel_error_history->back() <= opts.success_tol;
  rep.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

namespace detail {

inline RunReport run_checked(const Instance& inst, SolverConfig config, const RunOptions& opts,
                             std::initializer_list<Algorithm> allowed) {
  bool ok = false;
  for (Algorithm a : allowed) ok = ok || a == config.algorithm;
  require(ok, "solver entry point does not match config.algorithm");
  return run(inst, std::move(config), opts);
}

}  // namespace detail

inline RunReport run_cnht(const Instance& inst, const SolverConfig& c, const RunOptions& o = {}) {
  return detail::run_checked(inst, c, o, {Algorithm::CNHT});
}
inline RunReport run_cnhtp(const Instance& inst, const SolverConfig& c, const RunOptions& o = {}) {
  return detail::run_checked(inst, c, o, {Algorithm::CNHTP});
}
inline RunReport run_cnot(const Instance& inst, const SolverConfig& c, const RunOptions& o = {}) {
  return detail::run_checked(inst, c, o, {Algorithm::CNOT});
}
inline RunReport run_cnotp(const Instance& inst, const SolverConfig& c, const RunOptions& o = {}) {
  return detail::run_checked(inst, c, o, {Algorithm::CNOTP});
}
inline RunReport run_baseline(const Instance& inst, const SolverConfig& c,
                              const RunOptions& o = {}) {
  return detail::run_checked(inst, c, o, {Algorithm::IHT, Algorithm::HTP, Algorithm::SP});
}

}  // namespace cnt
