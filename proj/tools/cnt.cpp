// cnt: single solves, success sweeps, phase-transition grids and theorem
// constants from the command line.

#include "cli_support.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace cnt;
using cnt::cli::ConfigError;

struct SolveArgs {
  std::string matrix;
  bool gen = false;
  std::optional<long long> m, n, k;
  std::string kind = "gaussian";
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string algo = "cnhtp";
  std::optional<long long> q;
  double lambda = 1.0;
  double alpha = 1.0;
  double gamma = 0.1;
  int max_iter = 30;
  double tol = 1e-8;
  double success_tol = 1e-3;
  bool stop_at_success = false;
  std::string out;
};

int cmd_solve(const SolveArgs& a) {
  if (a.gen == !a.matrix.empty()) throw ConfigError("give exactly one of --matrix FILE or --gen");
  Instance inst;
  std::optional<Index> k;
  if (a.gen) {
    for (auto [name, v] : {std::pair{"--m", a.m}, {"--n", a.n}, {"--k", a.k}}) {
      if (!v) throw ConfigError(std::string("--gen requires ") + name);
    }
    GenSpec g;
    g.m = static_cast<Index>(*a.m);
    g.n = static_cast<Index>(*a.n);
    g.k = static_cast<Index>(*a.k);
    g.kind = cli::parse_kind(a.kind);
    g.noise_level = a.noise;
    g.seed = a.seed;
    validate(g);
    inst = make_instance(g);
    k = g.k;
  } else {
    inst = io::read_instance(a.matrix);
    if (a.k) {
      k = static_cast<Index>(*a.k);
    } else if (inst.truth) {
      k = inst.truth->nnz();
    } else {
      throw ConfigError("--k is required when the instance file has no ground truth");
    }
  }

  SolverConfig c;
  c.algorithm = cli::parse_algo(a.algo);
  c.k = *k;
  c.direction.q = a.q ? static_cast<Index>(*a.q) : c.k;
  c.direction.alpha = a.alpha;
  c.direction.gamma = a.gamma;
  c.lambda = a.lambda;
  c.max_iter = a.max_iter;
  c.tol_rel_iterate = a.tol;
  for (const auto& w : validate(c, inst.A.rows(), inst.A.cols())) std::cerr << "warning: " << w << "\n";

  RunOptions opts;
  opts.success_tol = a.success_tol;
  opts.stop_at_success = a.stop_at_success;
  const RunReport rep = run(inst, c, opts);

  nlohmann::json j = cli::to_json(rep);
  j["config"] = cli::to_json(c);
  const std::string text = j.dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    cli::write_file(a.out, text);
  }
  return rep.termination == Termination::direction_failure ? 2 : 0;
}

std::vector<cli::Series> sweep_series(const std::vector<experiments::SweepRow>& rows) {
  std::vector<cli::Series> series;
  for (const auto& r : rows) {
    if (series.empty() || series.back().name != to_string(r.algorithm)) {
      series.push_back({std::string(to_string(r.algorithm)), {}});
    }
    series.back().points.emplace_back(static_cast<double>(r.k), r.freq);
  }
  return series;
}

int cmd_sweep(const std::string& config, const std::string& out, int workers,
              const std::string& svg) {
  experiments::SweepSpec spec =
      cli::sweep_from_config(cli::parse_config(cli::read_file(config), cli::sweep_keys()));
  spec.workers = workers;
  const auto rows = experiments::success_sweep(spec);
  int failures = 0;
  for (const auto& r : rows) failures += r.direction_failures;
  if (failures > 0) {
    std::cerr << "warning: " << failures << " trial(s) ended with direction_failure\n";
  }
  const std::string csv = experiments::sweep_csv(rows);
  if (out.empty()) {
    std::cout << csv;
  } else {
    cli::write_file(out, csv);
  }
  if (!svg.empty()) {
    cli::write_file(svg, cli::svg_line_chart(sweep_series(rows), "Success frequency", "k",
                                             "success frequency"));
  }
  return 0;
}

int cmd_phase(const std::string& config, const std::string& prefix, bool svg, int workers) {
  experiments::PhaseSpec spec =
      cli::phase_from_config(cli::parse_config(cli::read_file(config), cli::phase_keys()));
  spec.workers = workers;
  const auto res = experiments::phase_transition(spec);
  for (const auto& line : res.log) std::cerr << line << "\n";
  cli::write_file(prefix + "_cells.csv", experiments::phase_cells_csv(res.cells));
  cli::write_file(prefix + "_fits.csv", experiments::phase_fits_csv(res.fits));
  if (svg) {
    cli::Series s{std::string(to_string(spec.algorithm)), {}};
    for (const auto& f : res.fits) s.points.emplace_back(f.delta, f.rho_star.value);
    cli::write_file(prefix + "_curve.svg",
                    cli::svg_line_chart({s}, "Phase transition", "delta = m/n", "rho* = k/m"));
  }
  return 0;
}

int cmd_theory(const theory::TheoryInputs& in, const std::string& name) {
  const auto th = theory::parse_theorem(name);
  if (!th) throw ConfigError("--theorem must be one of cnht, cnhtp, cnot, cnotp");
  const auto report = theory::check_theorem(*th, in);
  std::cout << cli::to_json(report, in).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressed-Newton thresholding solvers and experiments"};
  app.require_subcommand(1);

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "Solve one instance and print a JSON report");
  solve->add_option("--matrix", sa.matrix, "Instance file (CNT1 binary or CSV)");
  solve->add_flag("--gen", sa.gen, "Generate a random instance");
  solve->add_option("--m", sa.m, "Rows");
  solve->add_option("--n", sa.n, "Columns");
  solve->add_option("--k", sa.k, "Sparsity level");
  solve->add_option("--kind", sa.kind, "gaussian or bernoulli");
  solve->add_option("--noise", sa.noise, "Noise level");
  solve->add_option("--seed", sa.seed, "Generator seed");
  solve->add_option("--algo", sa.algo, "cnht, cnhtp, cnot, cnotp, iht, htp or sp");
  solve->add_option("--q", sa.q, "Newton subspace size (default k)");
  solve->add_option("--lambda", sa.lambda, "Stepsize");
  solve->add_option("--alpha", sa.alpha, "Off-subspace scale alpha");
  solve->add_option("--gamma", sa.gamma, "Off-subspace scale gamma");
  solve->add_option("--max-iter", sa.max_iter, "Iteration cap");
  solve->add_option("--tol", sa.tol, "Relative iterate-change tolerance");
  solve->add_option("--success-tol", sa.success_tol, "Relative error counted as success");
  solve->add_flag("--stop-at-success", sa.stop_at_success, "Stop once the success level is reached");
  solve->add_option("--out", sa.out, "Write JSON here instead of stdout");

  std::string sweep_config, sweep_out, sweep_svg;
  int sweep_workers = 1;
  auto* sweep = app.add_subcommand("sweep", "Success frequency over a grid of k");
  sweep->add_option("--config", sweep_config, "Config file")->required();
  sweep->add_option("--out", sweep_out, "CSV output (default stdout)");
  sweep->add_option("--workers", sweep_workers, "Worker threads")->check(CLI::PositiveNumber);
  sweep->add_option("--svg", sweep_svg, "Also write a chart of frequency against k");

  std::string phase_config, phase_prefix;
  bool phase_svg = false;
  int phase_workers = 1;
  auto* phase = app.add_subcommand("phase", "Phase-transition grid with logistic fits");
  phase->add_option("--config", phase_config, "Config file")->required();
  phase->add_option("--out-prefix", phase_prefix, "Output prefix P for P_cells.csv, P_fits.csv")
      ->required();
  phase->add_flag("--svg", phase_svg, "Also write P_curve.svg");
  phase->add_option("--workers", phase_workers, "Worker threads")->check(CLI::PositiveNumber);

  theory::TheoryInputs ti;
  std::string theorem = "cnht";
  auto* th = app.add_subcommand("theory", "Contraction constants and admissible stepsizes");
  th->add_option("--n", ti.n, "Signal length")->required();
  th->add_option("--k", ti.k, "Sparsity level")->required();
  th->add_option("--delta-q", ti.delta_q, "RIC of order q");
  th->add_option("--delta-k", ti.delta_k, "RIC of order k");
  th->add_option("--delta-2k", ti.delta_2k, "RIC of order 2k");
  th->add_option("--delta-3k", ti.delta_3k, "RIC of order 3k");
  th->add_option("--lambda", ti.lambda, "Stepsize");
  th->add_option("--theorem", theorem, "cnht, cnhtp, cnot or cnotp");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*solve) return cmd_solve(sa);
    if (*sweep) return cmd_sweep(sweep_config, sweep_out, sweep_workers, sweep_svg);
    if (*phase) return cmd_phase(phase_config, phase_prefix, phase_svg, phase_workers);
    if (*th) return cmd_theory(ti, theorem);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
