#pragma once
// Seeded generation of sensing matrices, sparse signals and noisy
// observations.
//
// Randomness comes from std::mt19937_64, whose output sequence is fixed by
// the C++ standard. Library distributions are avoided because their outputs
// differ between standard libraries; instead:
//   * uniform doubles take the top 53 bits of a draw,
//   * bounded integers use rejection sampling on the raw 64-bit draw,
//   * normals use the Marsaglia polar method (pairs, second value cached).
// Trial t of a batch seeded with s uses mix_seed(s, t) =
// splitmix64(s ^ splitmix64(t)), which is injective in t for fixed s.

#include "cnt/dense.hpp"
#include "cnt/thresholding.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace cnt {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t trial) {
  return splitmix64(seed ^ splitmix64(trial));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    detail::require(bound > 0, "Rng::below: bound must be positive");
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % bound;
  }

  double normal() {
    if (spare_) {
      const double s = *spare_;
      spare_.reset();
      return s;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    return u * f;
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

enum class MatrixKind { Gaussian, Bernoulli };

inline std::string_view to_string(MatrixKind kind) {
  return kind == MatrixKind::Gaussian ? "gaussian" : "bernoulli";
}

inline std::optional<MatrixKind> parse_matrix_kind(std::string_view s) {
  if (s == "gaussian") return MatrixKind::Gaussian;
  if (s == "bernoulli") return MatrixKind::Bernoulli;
  return std::nullopt;
}

struct GenSpec {
  Index m = 0;
  Index n = 0;
  Index k = 0;
  MatrixKind kind = MatrixKind::Gaussian;
  double noise_level = 0.0;
  std::uint64_t seed = 0;
};

inline void validate(const GenSpec& s) {
  detail::require(s.m >= 1 && s.n >= 1, "GenSpec: m and n must be >= 1");
  detail::require(s.m <= s.n, "GenSpec: m must not exceed n");
  detail::require(s.k >= 1 && s.k <= s.m, "GenSpec: k must lie in [1, min(m, n)]");
  detail::require(std::isfinite(s.noise_level) && s.noise_level >= 0.0,
                  "GenSpec: noise_level must be nonnegative");
}

struct Instance {
  SensingMatrix A;
  Vector y;
  std::optional<SparseVector> truth;
  /// Generation parameters. The binary file format stores only m, n, k,
  /// noise_level and seed; kind is left at its default when loaded.
  std::optional<GenSpec> gen;
};

/// Gaussian: N(0, 1/m). Bernoulli: +-1/sqrt(m) with equal probability.
inline SensingMatrix gen_matrix(const GenSpec& spec, Rng& rng) {
  Matrix A(spec.m, spec.n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.m));
  for (Index j = 0; j < spec.n; ++j) {
    for (Index i = 0; i < spec.m; ++i) {
      if (spec.kind == MatrixKind::Gaussian) {
        A(i, j) = scale * rng.normal();
      } else {
        A(i, j) = (rng.next_u64() >> 63) ? scale : -scale;
      }
    }
  }
  return SensingMatrix(std::move(A));
}

inline SensingMatrix gen_matrix(const GenSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  return gen_matrix(spec, rng);
}

/// Support is the first k slots of a partial Fisher-Yates shuffle; values are
/// standard normal (a zero draw is redrawn so the support has exactly k).
inline SparseVector gen_signal(Index n, Index k, Rng& rng) {
  detail::require(k >= 0 && k <= n, "gen_signal: k must lie in [0, n]");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  for (Index i = 0; i < k; ++i) {
    const auto j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  Vector x = Vector::Zero(n);
  for (Index i = 0; i < k; ++i) {
    double v = rng.normal();
    while (v == 0.0) v = rng.normal();
    x[perm[static_cast<std::size_t>(i)]] = v;
  }
  return SparseVector(std::move(x));
}

inline SparseVector gen_signal(Index n, Index k, std::uint64_t seed) {
  Rng rng(seed);
  return gen_signal(n, k, rng);
}

/// y = A x + noise_level * eta with eta ~ N(0, I); A, x and eta are drawn in
/// that order from one stream seeded with spec.seed.
inline Instance make_instance(const GenSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  Instance inst;
  inst.A = gen_matrix(spec, rng);
  SparseVector x = gen_signal(spec.n, spec.k, rng);
  Vector y = inst.A.data() * x.entries;
  if (spec.noise_level > 0.0) {
    Vector eta(spec.m);
    for (Index i = 0; i < spec.m; ++i) eta[i] = rng.normal();
    y += spec.noise_level * eta;
  }
  inst.y = std::move(y);
  inst.truth = std::move(x);
  inst.gen = spec;
  return inst;
}

/// Instance for trial t of a batch: the seed is replaced by mix_seed(seed, t).
inline Instance make_trial_instance(GenSpec spec, std::uint64_t trial) {
  spec.seed = mix_seed(spec.seed, trial);
  return make_instance(spec);
}

}  // namespace cnt
