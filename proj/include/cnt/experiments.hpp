#pragma once
// Randomized benchmark harness: success-frequency sweeps over k and
// phase-transition grids over (delta = m/n, rho = k/m) with a logistic fit of
// success probability against rho for each delta.
//
// Every trial gets its own instance seed derived from the master seed and
// its grid coordinates, so results do not depend on scheduling or on the
// number of workers.

#include "cnt/probgen.hpp"
#include "cnt/solvers.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace cnt::experiments {

/// Relative l2 error of the final iterate is at most tol.
inline bool judge_success(const RunReport& report, const SparseVector& truth, double tol) {
  detail::require(truth.entries.norm() > 0.0, "judge_success: truth must be nonzero");
  return relative_error(report.final.x.entries, truth) <= tol;
}

/// Evaluates fn(0..count-1) on up to `workers` threads; result i is stored at
/// position i.
template <class Result, class Fn>
std::vector<Result> parallel_map(std::size_t count, int workers, Fn&& fn) {
  std::vector<Result> out(count);
  const auto nthreads = static_cast<std::size_t>(std::max(1, workers));
  if (nthreads == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(std::min(nthreads, count));
  for (std::size_t w = 0; w < std::min(nthreads, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) out[i] = fn(i);
    });
  }
  return out;
}

/// Subspace size per grid point: a fixed q, or ceil(factor * k).
struct QRule {
  double factor = 1.0;
  std::optional<Index> fixed;
};

/// q for sparsity k, clamped to [k, m].
inline Index q_for(const QRule& rule, Index k, Index m) {
  const Index q = rule.fixed ? *rule.fixed
                             : static_cast<Index>(std::ceil(rule.factor * static_cast<double>(k) - 1e-9));
  return std::clamp(q, k, std::max(k, m));
}

struct TrialOutcome {
  bool success = false;
  bool direction_failure = false;
  int iterations = 0;
  double time_ms = 0.0;
};

inline TrialOutcome run_trial(const Instance& inst, SolverConfig config, double success_tol) {
  RunOptions opts;
  opts.success_tol = success_tol;
  opts.stop_at_success = true;
  const RunReport rep = run(inst, std::move(config), opts);
  TrialOutcome t;
  t.success = judge_success(rep, *inst.truth, success_tol);
  t.direction_failure = rep.termination == Termination::direction_failure;
  t.iterations = rep.iterations_used;
  t.time_ms = rep.wall_time_ms;
  return t;
}

struct SweepSpec {
  GenSpec base;  // base.k is ignored
  std::vector<Index> k_values;
  std::vector<Algorithm> algorithms;
  SolverConfig config_template;  // k, q and algorithm are set per cell
  QRule q_rule;
  int trials = 100;
  double success_tol = 1e-3;
  int workers = 1;
};

struct SweepRow {
  Algorithm algorithm = Algorithm::CNHTP;
  Index k = 0;
  int trials = 0;
  int successes = 0;
  double freq = 0.0;
  double mean_iters = 0.0;
  double mean_time_ms = 0.0;
  int direction_failures = 0;
};

inline void validate(const SweepSpec& s) {
  detail::require(s.trials >= 1, "SweepSpec: trials must be >= 1");
  detail::require(!s.k_values.empty(), "SweepSpec: k_values must be nonempty");
  detail::require(!s.algorithms.empty(), "SweepSpec: algorithms must be nonempty");
  detail::require(s.q_rule.factor >= 1.0, "SweepSpec: q factor must be >= 1");
  for (Index k : s.k_values) {
    GenSpec g = s.base;
    g.k = k;
    validate(g);
  }
}

/// Instance seed for trial t at sparsity k.
inline std::uint64_t sweep_seed(std::uint64_t master, Index k, int trial) {
  return mix_seed(mix_seed(master, static_cast<std::uint64_t>(k)),
                  static_cast<std::uint64_t>(trial));
}

/// One row per (algorithm, k) in input order. All algorithms see the same
/// instances at a given (k, trial).
inline std::vector<SweepRow> success_sweep(const SweepSpec& spec) {
  validate(spec);
  const std::size_t n_alg = spec.algorithms.size();
  const std::size_t n_k = spec.k_values.size();
  const auto n_tr = static_cast<std::size_t>(spec.trials);

  auto outcomes = parallel_map<TrialOutcome>(n_alg * n_k * n_tr, spec.workers, [&](std::size_t idx) {
    const std::size_t t = idx % n_tr;
    const std::size_t ki = (idx / n_tr) % n_k;
    const std::size_t ai = idx / (n_tr * n_k);
    GenSpec g = spec.base;
    g.k = spec.k_values[ki];
    g.seed = sweep_seed(spec.base.seed, g.k, static_cast<int>(t));
    const Instance inst = make_instance(g);
    SolverConfig c = spec.config_template;
    c.k = g.k;
    c.algorithm = spec.algorithms[ai];
    c.direction.q = q_for(spec.q_rule, g.k, g.m);
    return run_trial(inst, c, spec.success_tol);
  });

  std::vector<SweepRow> rows;
  for (std::size_t ai = 0; ai < n_alg; ++ai) {
    for (std::size_t ki = 0; ki < n_k; ++ki) {
      SweepRow row;
      row.algorithm = spec.algorithms[ai];
      row.k = spec.k_values[ki];
      row.trials = spec.trials;
      double iters = 0.0;
      double time = 0.0;
      for (std::size_t t = 0; t < n_tr; ++t) {
        const TrialOutcome& o = outcomes[(ai * n_k + ki) * n_tr + t];
        row.successes += o.success ? 1 : 0;
        row.direction_failures += o.direction_failure ? 1 : 0;
        iters += o.iterations;
        time += o.time_ms;
      }
      row.freq = static_cast<double>(row.successes) / row.trials;
      row.mean_iters = iters / row.trials;
      row.mean_time_ms = time / row.trials;
      rows.push_back(row);
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Logistic fit of success probability against rho.

struct LogisticPoint {
  double rho = 0.0;
  int trials = 0;
  int successes = 0;
};

enum class Saturation { none, all_success, all_fail };

inline std::string_view to_string(Saturation s) {
  switch (s) {
    case Saturation::none: return "none";
    case Saturation::all_success: return "all_success";
    case Saturation::all_fail: return "all_fail";
  }
  return "?";
}

struct LogisticFit {
  double a = 0.0;
  double b = 0.0;
  bool converged = false;
  Saturation saturated = Saturation::none;
  /// Successes and failures are separated in rho, so the likelihood has no
  /// finite maximizer; (a, b) then describe a steep step placed in the gap.
  bool separated = false;
  int iterations = 0;
};

inline double logistic(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

/// p(rho) = 1 / (1 + exp(-(a + b rho))) by iteratively reweighted least
/// squares on binomial counts, at most 100 iterations, stopping when the
/// score norm is <= 1e-8.
inline LogisticFit logistic_fit(std::span<const LogisticPoint> points) {
  std::vector<LogisticPoint> pts;
  for (const auto& p : points) {
    detail::require(p.trials >= 0 && p.successes >= 0 && p.successes <= p.trials,
                    "logistic_fit: need 0 <= successes <= trials");
    detail::require(std::isfinite(p.rho), "logistic_fit: rho must be finite");
    if (p.trials > 0) pts.push_back(p);
  }
  {
    std::vector<double> rhos;
    for (const auto& p : pts) rhos.push_back(p.rho);
    std::sort(rhos.begin(), rhos.end());
    rhos.erase(std::unique(rhos.begin(), rhos.end()), rhos.end());
    detail::require(rhos.size() >= 2, "logistic_fit: need at least 2 distinct rho values");
  }

  LogisticFit fit;
  long total = 0;
  long succ = 0;
  for (const auto& p : pts) {
    total += p.trials;
    succ += p.successes;
  }
  if (succ == total) {
    fit.saturated = Saturation::all_success;
    return fit;
  }
  if (succ == 0) {
    fit.saturated = Saturation::all_fail;
    return fit;
  }

  // Complete or quasi-complete separation.
  double max_s = -std::numeric_limits<double>::infinity();
  double min_s = std::numeric_limits<double>::infinity();
  double max_f = -std::numeric_limits<double>::infinity();
  double min_f = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) {
    if (p.successes > 0) {
      max_s = std::max(max_s, p.rho);
      min_s = std::min(min_s, p.rho);
    }
    if (p.successes < p.trials) {
      max_f = std::max(max_f, p.rho);
      min_f = std::min(min_f, p.rho);
    }
  }
  const bool decreasing_sep = max_s <= min_f;
  const bool increasing_sep = max_f <= min_s;
  if (decreasing_sep || increasing_sep) {
    const double lo = decreasing_sep ? max_s : max_f;
    const double hi = decreasing_sep ? min_f : min_s;
    double width = hi - lo;
    if (width <= 0.0) {
      std::vector<double> rhos;
      for (const auto& p : pts) rhos.push_back(p.rho);
      std::sort(rhos.begin(), rhos.end());
      width = std::numeric_limits<double>::infinity();
      for (std::size_t i = 1; i < rhos.size(); ++i) {
        if (rhos[i] > rhos[i - 1]) width = std::min(width, rhos[i] - rhos[i - 1]);
      }
    }
    // p = 0.99 at one edge of the gap and 0.01 at the other.
    const double slope = 2.0 * std::log(99.0) / width;
    fit.b = decreasing_sep ? -slope : slope;
    fit.a = -fit.b * 0.5 * (lo + hi);
    fit.separated = true;
    return fit;
  }

  auto loglik = [&](double a, double b) {
    double ll = 0.0;
    for (const auto& p : pts) {
      const double z = a + b * p.rho;
      // log p = -log(1+e^-z), log(1-p) = -log(1+e^z)
      const double lp = -std::log1p(std::exp(-std::abs(z))) - std::max(-z, 0.0);
      const double lq = -std::log1p(std::exp(-std::abs(z))) - std::max(z, 0.0);
      ll += p.successes * lp + (p.trials - p.successes) * lq;
    }
    return ll;
  };

  double a = 0.0;
  double b = 0.0;
  double ll = loglik(a, b);
  for (int it = 0; it < 100; ++it) {
    double g0 = 0.0, g1 = 0.0, h00 = 0.0, h01 = 0.0, h11 = 0.0;
    for (const auto& p : pts) {
      const double pr = logistic(a + b * p.rho);
      const double resid = p.successes - p.trials * pr;
      const double w = p.trials * pr * (1.0 - pr);
      g0 += resid;
      g1 += resid * p.rho;
      h00 += w;
      h01 += w * p.rho;
      h11 += w * p.rho * p.rho;
    }
    fit.iterations = it;
    if (std::hypot(g0, g1) <= 1e-8) {
      fit.converged = true;
      break;
    }
    const double det = h00 * h11 - h01 * h01;
    if (!(det > 0.0)) break;
    double da = (h11 * g0 - h01 * g1) / det;
    double db = (h00 * g1 - h01 * g0) / det;
    // Step halving keeps the log-likelihood nondecreasing.
    double step = 1.0;
    double ll_new = loglik(a + da, b + db);
    while (ll_new < ll && step > 1e-8) {
      step *= 0.5;
      ll_new = loglik(a + step * da, b + step * db);
    }
    a += step * da;
    b += step * db;
    ll = ll_new;
  }
  fit.a = a;
  fit.b = b;
  return fit;
}

struct RhoStar {
  double value = 0.0;
  bool clamped = false;
  /// Slope b >= 0: the fit does not describe a decreasing success curve.
  bool nonnegative_slope = false;
};

/// rho at which the fitted success probability equals `level`, clamped to
/// [rho_min, rho_max]. Saturated fits map to the matching end of the range
/// and nonnegative slopes to rho_min.
inline RhoStar rho_at_level(const LogisticFit& fit, double level, double rho_min, double rho_max) {
  detail::require(level > 0.0 && level < 1.0, "rho_at_level: level must lie in (0, 1)");
  detail::require(rho_min <= rho_max, "rho_at_level: rho_min must not exceed rho_max");
  RhoStar r;
  if (fit.saturated == Saturation::all_success) {
    r.value = rho_max;
    r.clamped = true;
    return r;
  }
  if (fit.saturated == Saturation::all_fail) {
    r.value = rho_min;
    r.clamped = true;
    return r;
  }
  if (!(fit.b < 0.0)) {
    r.value = rho_min;
    r.clamped = true;
    r.nonnegative_slope = true;
    return r;
  }
  const double raw = (std::log(level / (1.0 - level)) - fit.a) / fit.b;
  r.value = std::clamp(raw, rho_min, rho_max);
  r.clamped = r.value != raw;
  return r;
}

// ---------------------------------------------------------------------------
// Phase transition grid.

struct PhaseSpec {
  Index n = 128;
  std::vector<double> deltas;
  std::vector<double> rhos;
  int trials = 10;
  Algorithm algorithm = Algorithm::CNHTP;
  SolverConfig config;  // k, q and algorithm are set per cell
  QRule q_rule;
  MatrixKind kind = MatrixKind::Gaussian;
  double noise_level = 0.0;
  std::uint64_t seed = 0;
  double success_tol = 1e-3;
  double level = 0.9;
  int workers = 1;
};

struct PhaseCell {
  double delta = 0.0;
  double rho = 0.0;
  Index m = 0;
  Index k = 0;
  int trials = 0;
  int successes = 0;
};

struct PhaseFitRow {
  double delta = 0.0;
  LogisticFit fit;
  RhoStar rho_star;
};

struct PhaseResult {
  std::vector<PhaseCell> cells;
  std::vector<PhaseFitRow> fits;
  std::vector<std::string> log;
};

inline void validate(const PhaseSpec& s) {
  detail::require(s.n >= 1, "PhaseSpec: n must be >= 1");
  detail::require(!s.deltas.empty() && !s.rhos.empty(), "PhaseSpec: empty grid");
  detail::require(s.trials >= 1, "PhaseSpec: trials must be >= 1");
  detail::require(s.q_rule.factor >= 1.0, "PhaseSpec: q factor must be >= 1");
  for (double d : s.deltas) {
    detail::require(d > 0.0 && d <= 1.0, "PhaseSpec: delta must lie in (0, 1]");
  }
  for (double r : s.rhos) detail::require(r > 0.0 && r <= 1.0, "PhaseSpec: rho must lie in (0, 1]");
}

inline PhaseResult phase_transition(const PhaseSpec& spec) {
  validate(spec);
  PhaseResult res;

  struct Task {
    std::size_t cell;
    int trial;
  };
  std::vector<Task> tasks;
  for (std::size_t di = 0; di < spec.deltas.size(); ++di) {
    const double delta = spec.deltas[di];
    const Index m = std::max<Index>(1, std::llround(delta * static_cast<double>(spec.n)));
    for (std::size_t ri = 0; ri < spec.rhos.size(); ++ri) {
      const double rho = spec.rhos[ri];
      const Index k = std::llround(rho * static_cast<double>(m));
      if (k < 1) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "skipping cell delta=%.17g rho=%.17g: k rounds to 0", delta, rho);
        res.log.emplace_back(buf);
        continue;
      }
      res.cells.push_back({delta, rho, m, std::min(k, m), spec.trials, 0});
      for (int t = 0; t < spec.trials; ++t) tasks.push_back({res.cells.size() - 1, t});
    }
  }

  auto outcomes = parallel_map<TrialOutcome>(tasks.size(), spec.workers, [&](std::size_t i) {
    const Task& task = tasks[i];
    const PhaseCell& cell = res.cells[task.cell];
    GenSpec g;
    g.m = cell.m;
    g.n = spec.n;
    g.k = cell.k;
    g.kind = spec.kind;
    g.noise_level = spec.noise_level;
    g.seed = mix_seed(mix_seed(mix_seed(spec.seed, static_cast<std::uint64_t>(cell.m)),
                               static_cast<std::uint64_t>(cell.k)),
                      static_cast<std::uint64_t>(task.trial));
    const Instance inst = make_instance(g);
    SolverConfig c = spec.config;
    c.k = cell.k;
    c.algorithm = spec.algorithm;
    c.direction.q = q_for(spec.q_rule, cell.k, cell.m);
    return run_trial(inst, c, spec.success_tol);
  });
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    res.cells[tasks[i].cell].successes += outcomes[i].success ? 1 : 0;
  }

  const double rho_min = *std::min_element(spec.rhos.begin(), spec.rhos.end());
  const double rho_max = *std::max_element(spec.rhos.begin(), spec.rhos.end());
  for (double delta : spec.deltas) {
    std::vector<LogisticPoint> pts;
    for (const auto& c : res.cells) {
      if (c.delta == delta) pts.push_back({c.rho, c.trials, c.successes});
    }
    PhaseFitRow row;
    row.delta = delta;
    try {
      row.fit = logistic_fit(pts);
      row.rho_star = rho_at_level(row.fit, spec.level, rho_min, rho_max);
    } catch (const std::invalid_argument&) {
      // Fewer than two usable rho values.
      int t = 0, s = 0;
      for (const auto& p : pts) {
        t += p.trials;
        s += p.successes;
      }
      row.fit.saturated = (t > 0 && s == t) ? Saturation::all_success : Saturation::all_fail;
      row.rho_star = rho_at_level(row.fit, spec.level, rho_min, rho_max);
      char buf[128];
      std::snprintf(buf, sizeof buf, "delta=%.17g: fewer than two rho values, fit skipped", delta);
      res.log.emplace_back(buf);
    }
    res.fits.push_back(row);
  }
  return res;
}

// ---------------------------------------------------------------------------
// CSV output. Floats use 17 significant digits.

inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string sweep_csv(std::span<const SweepRow> rows, bool include_timing = true) {
  std::string out = include_timing ? "algo,k,trials,successes,freq,mean_iters,mean_time_ms\n"
                                   : "algo,k,trials,successes,freq,mean_iters\n";
  for (const auto& r : rows) {
    out += std::string(to_string(r.algorithm)) + "," + std::to_string(r.k) + "," +
           std::to_string(r.trials) + "," + std::to_string(r.successes) + "," + fmt17(r.freq) +
           "," + fmt17(r.mean_iters);
    if (include_timing) out += "," + fmt17(r.mean_time_ms);
    out += "\n";
  }
  return out;
}

inline std::string phase_cells_csv(std::span<const PhaseCell> cells) {
  std::string out = "delta,rho,m,k,trials,successes\n";
  for (const auto& c : cells) {
    out += fmt17(c.delta) + "," + fmt17(c.rho) + "," + std::to_string(c.m) + "," +
           std::to_string(c.k) + "," + std::to_string(c.trials) + "," +
           std::to_string(c.successes) + "\n";
  }
  return out;
}

inline std::string phase_fits_csv(std::span<const PhaseFitRow> fits) {
  std::string out = "delta,a,b,rho_star,saturated\n";
  for (const auto& f : fits) {
    out += fmt17(f.delta) + "," + fmt17(f.fit.a) + "," + fmt17(f.fit.b) + "," +
           fmt17(f.rho_star.value) + "," + std::string(to_string(f.fit.saturated)) + "\n";
  }
  return out;
}

}  // namespace cnt::experiments
