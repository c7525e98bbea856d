#pragma once
// Convergence constants for the compressed Newton thresholding family.
//
// All four error bounds share the core factor
//
//   core = delta_3k + Delta(lambda, delta_q) * (1 + sqrt(t) * delta_3k),
//   Delta(lambda, d) = max{|1 - lambda/(1-d)|, |1 - lambda/(1+d)|},
//
// with t = ceil(n/k) and phi the golden ratio. The contraction factors scale
// core by a theorem-specific prefactor, and rho < 1 holds exactly when
// lambda lies in
//
//   ((1+delta_q)(1-c), (1-delta_q)(1+c)),  c = (eps - delta_3k) / (1 + sqrt(t) delta_3k)
//
// where eps is the reciprocal of the prefactor's RIC-dependent part. The RIC
// threshold of each theorem is the root in (0,1) of a polynomial h_i obtained
// by setting every RIC to one common value.
//
// RIC values are supplied by the caller; computing them is not attempted.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cnt::theory {

inline constexpr double kPhi = std::numbers::phi;

enum class Theorem { CNHT_T35, CNHTP_T37, CNOT_T39, CNOTP_T310 };

inline constexpr Theorem kAllTheorems[] = {Theorem::CNHT_T35, Theorem::CNHTP_T37,
                                           Theorem::CNOT_T39, Theorem::CNOTP_T310};

inline std::string_view to_string(Theorem t) {
  switch (t) {
    case Theorem::CNHT_T35: return "cnht";
    case Theorem::CNHTP_T37: return "cnhtp";
    case Theorem::CNOT_T39: return "cnot";
    case Theorem::CNOTP_T310: return "cnotp";
  }
  return "?";
}

inline std::optional<Theorem> parse_theorem(std::string_view s) {
  for (Theorem t : kAllTheorems) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

struct TheoryInputs {
  std::int64_t n = 1;
  std::int64_t k = 1;
  double delta_q = 0.0;
  double delta_k = 0.0;
  double delta_2k = 0.0;
  double delta_3k = 0.0;
  double lambda = 1.0;
};

/// ceil(n / k) in integer arithmetic.
inline std::int64_t ceil_ratio(std::int64_t n, std::int64_t k) {
  if (n < 1 || k < 1) throw std::invalid_argument("ceil_ratio: n and k must be >= 1");
  return (n + k - 1) / k;
}

inline void validate(const TheoryInputs& in) {
  auto in_unit = [](double d) { return std::isfinite(d) && d >= 0.0 && d < 1.0; };
  if (in.n < 1 || in.k < 1 || in.k > in.n) {
    throw std::invalid_argument("TheoryInputs: need 1 <= k <= n");
  }
  if (!in_unit(in.delta_q) || !in_unit(in.delta_k) || !in_unit(in.delta_2k) ||
      !in_unit(in.delta_3k)) {
    throw std::invalid_argument("TheoryInputs: RIC values must lie in [0, 1)");
  }
  if (!(in.delta_k <= in.delta_2k && in.delta_2k <= in.delta_3k)) {
    throw std::invalid_argument("TheoryInputs: need delta_k <= delta_2k <= delta_3k");
  }
  if (!std::isfinite(in.lambda) || in.lambda <= 0.0) {
    throw std::invalid_argument("TheoryInputs: lambda must be positive");
  }
}

/// Delta(lambda, delta_q).
inline double delta_fn(double lambda, double delta_q) {
  if (!(delta_q >= 0.0 && delta_q < 1.0)) {
    throw std::invalid_argument("delta_fn: delta_q must lie in [0, 1)");
  }
  if (!(lambda > 0.0)) throw std::invalid_argument("delta_fn: lambda must be positive");
  return std::max(std::abs(1.0 - lambda / (1.0 - delta_q)),
                  std::abs(1.0 - lambda / (1.0 + delta_q)));
}

namespace detail {

inline double sqrt_t(const TheoryInputs& in) {
  return std::sqrt(static_cast<double>(ceil_ratio(in.n, in.k)));
}

inline double core(const TheoryInputs& in) {
  return in.delta_3k + delta_fn(in.lambda, in.delta_q) * (1.0 + sqrt_t(in) * in.delta_3k);
}

/// eps in the lambda-interval half-width c = (eps - delta_3k)/(1 + sqrt(t) delta_3k).
inline double interval_eps(Theorem th, const TheoryInputs& in) {
  switch (th) {
    case Theorem::CNHT_T35: return 1.0 / kPhi;
    case Theorem::CNHTP_T37: return std::sqrt(1.0 - in.delta_2k * in.delta_2k) / kPhi;
    case Theorem::CNOT_T39:
      return std::sqrt((1.0 - in.delta_2k) / (1.0 + in.delta_k)) / (3.0 * kPhi);
    case Theorem::CNOTP_T310: return (1.0 - in.delta_2k) / (3.0 * kPhi);
  }
  return 0.0;
}

}  // namespace detail

inline double rho_cnht(const TheoryInputs& in) {
  validate(in);
  return kPhi * detail::core(in);
}

inline double rho_cnhtp(const TheoryInputs& in) {
  validate(in);
  return kPhi / std::sqrt(1.0 - in.delta_2k * in.delta_2k) * detail::core(in);
}

inline double rho_cnot(const TheoryInputs& in) {
  validate(in);
  return 3.0 * kPhi * std::sqrt((1.0 + in.delta_k) / (1.0 - in.delta_2k)) * detail::core(in);
}

inline double rho_cnotp(const TheoryInputs& in) {
  validate(in);
  return 3.0 * kPhi / (1.0 - in.delta_2k) * detail::core(in);
}

/// Noise amplifier in the CNHT error bound.
inline double tau_cnht(const TheoryInputs& in) {
  validate(in);
  const double t = static_cast<double>(ceil_ratio(in.n, in.k));
  return in.lambda * kPhi * std::sqrt(t * (1.0 + in.delta_k)) / (1.0 - in.delta_q);
}

inline double tau_cnhtp(const TheoryInputs& in) {
  validate(in);
  const double t = static_cast<double>(ceil_ratio(in.n, in.k));
  const double d2 = in.delta_2k;
  return in.lambda * kPhi / (1.0 - in.delta_q) *
             std::sqrt(t * (1.0 + in.delta_k) / (1.0 - d2 * d2)) +
         std::sqrt(1.0 + in.delta_k) / (1.0 - d2);
}

inline double tau_cnot(const TheoryInputs& in) {
  validate(in);
  const double st = detail::sqrt_t(in);
  const double s2 = std::sqrt(1.0 - in.delta_2k);
  return 3.0 * in.lambda * kPhi * (1.0 + in.delta_k) * st / ((1.0 - in.delta_q) * s2) +
         2.0 * kPhi / s2;
}

inline double tau_cnotp(const TheoryInputs& in) {
  validate(in);
  const double st = detail::sqrt_t(in);
  const double den = (1.0 - in.delta_2k) * std::sqrt(1.0 + in.delta_2k);
  return 3.0 * in.lambda * kPhi * (1.0 + in.delta_k) * st / ((1.0 - in.delta_q) * den) +
         2.0 * kPhi / den + std::sqrt(1.0 + in.delta_k) / (1.0 - in.delta_2k);
}

inline double rho(Theorem th, const TheoryInputs& in) {
  switch (th) {
    case Theorem::CNHT_T35: return rho_cnht(in);
    case Theorem::CNHTP_T37: return rho_cnhtp(in);
    case Theorem::CNOT_T39: return rho_cnot(in);
    case Theorem::CNOTP_T310: return rho_cnotp(in);
  }
  return 0.0;
}

inline double tau(Theorem th, const TheoryInputs& in) {
  switch (th) {
    case Theorem::CNHT_T35: return tau_cnht(in);
    case Theorem::CNHTP_T37: return tau_cnhtp(in);
    case Theorem::CNOT_T39: return tau_cnot(in);
    case Theorem::CNOTP_T310: return tau_cnotp(in);
  }
  return 0.0;
}

/// h_i(delta) for ratio t = ceil(n/k); each is increasing on (0, 1) with
/// h_i(0) < 0 < h_i(1), and its root is the theorem's RIC threshold.
inline double threshold_polynomial(Theorem th, std::int64_t t, double d) {
  const double tt = static_cast<double>(t);
  const double st = std::sqrt(tt);
  switch (th) {
    case Theorem::CNHT_T35: return st * d * d + 2.0 * d - 1.0 / kPhi;
    case Theorem::CNHTP_T37: return kPhi * st * d * d + (2.0 * kPhi + 1.0) * d - 1.0;
    case Theorem::CNOT_T39: {
      const double d2 = d * d;
      const double poly = tt * d2 * d2 * d + (tt + 4.0 * st) * d2 * d2 +
                          4.0 * (st + 1.0) * d2 * d + 4.0 * d2;
      return 9.0 * kPhi * kPhi * poly + d - 1.0;
    }
    case Theorem::CNOTP_T310:
      return 3.0 * kPhi * st * d * d + (6.0 * kPhi + 1.0) * d - 1.0;
  }
  return 0.0;
}

/// Root of an increasing function on (lo, hi) with a sign change; stops at
/// width 1e-12 or after 200 halvings.
template <class F>
double bisect_increasing(F&& f, double lo, double hi) {
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Upper bound on delta_max{q,3k} required by the theorem.
inline double delta_threshold(Theorem th, std::int64_t n, std::int64_t k) {
  const std::int64_t t = ceil_ratio(n, k);
  const double st = std::sqrt(static_cast<double>(t));
  switch (th) {
    case Theorem::CNHT_T35: return (-1.0 + std::sqrt(1.0 + st / kPhi)) / st;
    case Theorem::CNHTP_T37: {
      const double b = 2.0 * kPhi + 1.0;
      return (-b + std::sqrt(b * b + 4.0 * kPhi * st)) / (2.0 * kPhi * st);
    }
    case Theorem::CNOT_T39:
      return bisect_increasing([&](double d) { return threshold_polynomial(th, t, d); }, 0.0,
                               1.0);
    case Theorem::CNOTP_T310: {
      const double b = 1.0 + 6.0 * kPhi;
      return (-b + std::sqrt(b * b + 12.0 * kPhi * st)) / (6.0 * kPhi * st);
    }
  }
  return 0.0;
}

struct LambdaInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool empty() const { return !(lo < hi); }
  bool contains(double x) const { return lo < x && x < hi; }
};

/// Open lambda interval on which rho < 1; empty (lo >= hi) when the RIC
/// values are too large.
inline LambdaInterval lambda_interval(Theorem th, const TheoryInputs& in) {
  validate(in);
  const double c = (detail::interval_eps(th, in) - in.delta_3k) /
                   (1.0 + detail::sqrt_t(in) * in.delta_3k);
  return {(1.0 + in.delta_q) * (1.0 - c), (1.0 - in.delta_q) * (1.0 + c)};
}

struct TheoremReport {
  Theorem theorem = Theorem::CNHT_T35;
  double delta_threshold = 0.0;
  double polynomial_at_threshold = 0.0;  // h_i(delta_threshold)
  LambdaInterval lambda_interval;
  double rho = 0.0;
  double tau = 0.0;
  bool conditions_met = false;
};

/// conditions_met = max(delta_q, delta_3k) < threshold and lambda inside the
/// interval; rho < 1 follows and is checked.
inline TheoremReport check_theorem(Theorem th, const TheoryInputs& in) {
  validate(in);
  TheoremReport r;
  r.theorem = th;
  r.delta_threshold = delta_threshold(th, in.n, in.k);
  r.polynomial_at_threshold =
      threshold_polynomial(th, ceil_ratio(in.n, in.k), r.delta_threshold);
  r.lambda_interval = lambda_interval(th, in);
  r.rho = rho(th, in);
  r.tau = tau(th, in);
  r.conditions_met = std::max(in.delta_q, in.delta_3k) < r.delta_threshold &&
                     r.lambda_interval.contains(in.lambda);
  if (r.conditions_met && !(r.rho < 1.0)) {
    throw std::logic_error("check_theorem: conditions met but rho >= 1");
  }
  return r;
}

}  // namespace cnt::theory
