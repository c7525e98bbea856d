#pragma once
// Pieces of the `cnt` command-line tool that are tested directly: the flat
// config format, JSON encoding of reports, and SVG line charts.

#include "cnt/experiments.hpp"
#include "cnt/instance_io.hpp"
#include "cnt/solvers.hpp"
#include "cnt/theory.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cnt::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Flat `key = value` config files.

using ConfigMap = std::map<std::string, std::string>;

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Lines are `key = value`; `#` starts a comment; blank lines are ignored.
/// Keys outside `allowed` and repeated keys are errors.
inline ConfigMap parse_config(const std::string& text, const std::set<std::string>& allowed) {
  ConfigMap out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!allowed.contains(key)) {
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (value.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": empty value for '" + key + "'");
    }
    if (!out.emplace(key, value).second) {
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

inline double parse_double(const std::string& key, const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || !std::isfinite(v)) {
    throw ConfigError(key + ": expected a number, got '" + s + "'");
  }
  return v;
}

inline long long parse_int(const std::string& key, const std::string& s) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') {
    throw ConfigError(key + ": expected an integer, got '" + s + "'");
  }
  return v;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& s) {
  char* end = nullptr;
  if (s.empty() || s[0] == '-') throw ConfigError(key + ": expected a nonnegative integer");
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') {
    throw ConfigError(key + ": expected a nonnegative integer, got '" + s + "'");
  }
  return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string p;
  while (std::getline(ss, p, sep)) parts.push_back(trim(p));
  return parts;
}

/// Comma-separated items; an item `a:step:b` expands to a, a+step, ..., <= b.
inline std::vector<long long> parse_int_list(const std::string& key, const std::string& s) {
  std::vector<long long> out;
  for (const auto& item : split(s, ',')) {
    const auto r = split(item, ':');
    if (r.size() == 1) {
      out.push_back(parse_int(key, r[0]));
    } else if (r.size() == 3) {
      const long long a = parse_int(key, r[0]);
      const long long step = parse_int(key, r[1]);
      const long long b = parse_int(key, r[2]);
      if (step <= 0 || b < a) throw ConfigError(key + ": bad range '" + item + "'");
      for (long long v = a; v <= b; v += step) out.push_back(v);
    } else {
      throw ConfigError(key + ": bad list item '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

/// Comma-separated numbers; an item `a:step:b` expands to a + i*step up to b
/// (inclusive, with a relative slack of 1e-9 on the endpoint).
inline std::vector<double> parse_real_list(const std::string& key, const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) {
    const auto r = split(item, ':');
    if (r.size() == 1) {
      out.push_back(parse_double(key, r[0]));
    } else if (r.size() == 3) {
      const double a = parse_double(key, r[0]);
      const double step = parse_double(key, r[1]);
      const double b = parse_double(key, r[2]);
      if (!(step > 0.0) || b < a) throw ConfigError(key + ": bad range '" + item + "'");
      const auto count = static_cast<long long>(std::floor((b - a) / step + 1e-9)) + 1;
      for (long long i = 0; i < count; ++i) out.push_back(a + static_cast<double>(i) * step);
    } else {
      throw ConfigError(key + ": bad list item '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

/// q is an integer, `k`, or `<factor>k` (for example 1.25k); factors round up.
inline experiments::QRule parse_q_rule(const std::string& s) {
  experiments::QRule rule;
  if (!s.empty() && s.back() == 'k') {
    const std::string f = s.substr(0, s.size() - 1);
    rule.factor = f.empty() ? 1.0 : parse_double("q", f);
    if (rule.factor < 1.0) throw ConfigError("q: factor must be >= 1");
  } else {
    const long long q = parse_int("q", s);
    if (q < 1) throw ConfigError("q: must be >= 1");
    rule.fixed = static_cast<Index>(q);
  }
  return rule;
}

inline MatrixKind parse_kind(const std::string& s) {
  const auto k = parse_matrix_kind(s);
  if (!k) throw ConfigError("kind: expected gaussian or bernoulli, got '" + s + "'");
  return *k;
}

inline Algorithm parse_algo(const std::string& s) {
  const auto a = parse_algorithm(s);
  if (!a) throw ConfigError("unknown algorithm '" + s + "'");
  return *a;
}

inline const std::set<std::string>& solver_keys() {
  static const std::set<std::string> keys = {"q",   "lambda",       "alpha",       "gamma",
                                             "max_iter", "tol",     "tol_residual", "qp_tol",
                                             "qp_max_iter", "success_tol", "trials", "seed",
                                             "kind", "noise"};
  return keys;
}

inline std::set<std::string> sweep_keys() {
  auto keys = solver_keys();
  keys.insert({"m", "n", "k_values", "algorithms"});
  return keys;
}

inline std::set<std::string> phase_keys() {
  auto keys = solver_keys();
  keys.insert({"n", "deltas", "rhos", "algorithm", "level"});
  return keys;
}

/// Solver fields shared by sweep and phase configs; k, q and the algorithm
/// are filled in per grid point.
inline SolverConfig solver_from_config(const ConfigMap& c) {
  SolverConfig s;
  s.direction.alpha = 1.0;
  s.direction.gamma = 0.1;
  if (auto it = c.find("lambda"); it != c.end()) s.lambda = parse_double("lambda", it->second);
  if (auto it = c.find("alpha"); it != c.end()) s.direction.alpha = parse_double("alpha", it->second);
  if (auto it = c.find("gamma"); it != c.end()) s.direction.gamma = parse_double("gamma", it->second);
  if (auto it = c.find("max_iter"); it != c.end()) {
    s.max_iter = static_cast<int>(parse_int("max_iter", it->second));
  }
  if (auto it = c.find("tol"); it != c.end()) s.tol_rel_iterate = parse_double("tol", it->second);
  if (auto it = c.find("tol_residual"); it != c.end()) {
    s.tol_residual = parse_double("tol_residual", it->second);
  }
  if (auto it = c.find("qp_tol"); it != c.end()) s.qp_tol = parse_double("qp_tol", it->second);
  if (auto it = c.find("qp_max_iter"); it != c.end()) {
    s.qp_max_iter = static_cast<int>(parse_int("qp_max_iter", it->second));
  }
  return s;
}

template <class T>
T get_or(const ConfigMap& c, const std::string& key, T fallback,
         T (*parse)(const std::string&, const std::string&)) {
  const auto it = c.find(key);
  return it == c.end() ? fallback : parse(key, it->second);
}

inline int parse_int_key(const std::string& key, const std::string& s) {
  return static_cast<int>(parse_int(key, s));
}

/// Checks a SolverConfig at every grid point before any trial runs.
inline void check_grid_point(SolverConfig c, Algorithm a, Index k, const experiments::QRule& q,
                             Index m, Index n) {
  c.algorithm = a;
  c.k = k;
  c.direction.q = q.fixed ? *q.fixed : experiments::q_for(q, k, m);
  try {
    validate(c, m, n);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(e.what()) + " (k=" + std::to_string(k) + ")");
  }
}

inline experiments::SweepSpec sweep_from_config(const ConfigMap& c) {
  for (const char* req : {"m", "n", "k_values", "algorithms"}) {
    if (!c.contains(req)) throw ConfigError(std::string("missing required key '") + req + "'");
  }
  experiments::SweepSpec s;
  s.base.m = static_cast<Index>(parse_int("m", c.at("m")));
  s.base.n = static_cast<Index>(parse_int("n", c.at("n")));
  s.base.kind = c.contains("kind") ? parse_kind(c.at("kind")) : MatrixKind::Gaussian;
  s.base.noise_level = get_or<double>(c, "noise", 0.0, parse_double);
  s.base.seed = get_or<std::uint64_t>(c, "seed", 0, parse_u64);
  for (long long k : parse_int_list("k_values", c.at("k_values"))) {
    s.k_values.push_back(static_cast<Index>(k));
  }
  for (const auto& a : split(c.at("algorithms"), ',')) s.algorithms.push_back(parse_algo(a));
  s.config_template = solver_from_config(c);
  s.q_rule = c.contains("q") ? parse_q_rule(c.at("q")) : experiments::QRule{};
  s.trials = get_or<int>(c, "trials", 100, parse_int_key);
  s.success_tol = get_or<double>(c, "success_tol", 1e-3, parse_double);
  try {
    experiments::validate(s);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  for (Algorithm a : s.algorithms) {
    for (Index k : s.k_values) check_grid_point(s.config_template, a, k, s.q_rule, s.base.m, s.base.n);
  }
  return s;
}

inline experiments::PhaseSpec phase_from_config(const ConfigMap& c) {
  for (const char* req : {"n", "deltas", "rhos"}) {
    if (!c.contains(req)) throw ConfigError(std::string("missing required key '") + req + "'");
  }
  experiments::PhaseSpec s;
  s.n = static_cast<Index>(parse_int("n", c.at("n")));
  s.deltas = parse_real_list("deltas", c.at("deltas"));
  s.rhos = parse_real_list("rhos", c.at("rhos"));
  s.algorithm = c.contains("algorithm") ? parse_algo(c.at("algorithm")) : Algorithm::CNHTP;
  s.config = solver_from_config(c);
  s.q_rule = c.contains("q") ? parse_q_rule(c.at("q")) : experiments::QRule{};
  s.kind = c.contains("kind") ? parse_kind(c.at("kind")) : MatrixKind::Gaussian;
  s.noise_level = get_or<double>(c, "noise", 0.0, parse_double);
  s.seed = get_or<std::uint64_t>(c, "seed", 0, parse_u64);
  s.trials = get_or<int>(c, "trials", 10, parse_int_key);
  s.success_tol = get_or<double>(c, "success_tol", 1e-3, parse_double);
  s.level = get_or<double>(c, "level", 0.9, parse_double);
  if (!(s.level > 0.0 && s.level < 1.0)) throw ConfigError("level must lie in (0, 1)");
  try {
    experiments::validate(s);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(s.noise_level >= 0.0)) throw ConfigError("noise must be nonnegative");
  for (double delta : s.deltas) {
    const Index m = std::max<Index>(1, std::llround(delta * static_cast<double>(s.n)));
    for (double rho : s.rhos) {
      const Index k = std::llround(rho * static_cast<double>(m));
      if (k >= 1) check_grid_point(s.config, s.algorithm, k, s.q_rule, m, s.n);
    }
  }
  return s;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// JSON.

inline nlohmann::json number(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline nlohmann::json to_json(const SolverConfig& c) {
  return {{"algorithm", to_string(c.algorithm)},
          {"k", c.k},
          {"q", c.direction.q},
          {"lambda", c.lambda},
          {"alpha", c.direction.alpha},
          {"gamma", c.direction.gamma},
          {"max_iter", c.max_iter},
          {"tol", c.tol_rel_iterate},
          {"tol_residual", c.tol_residual}};
}

inline nlohmann::json to_json(const RunReport& r) {
  nlohmann::json j;
  j["termination"] = to_string(r.termination);
  j["iterations_used"] = r.iterations_used;
  j["objective"] = number(r.final.objective);
  j["wall_time_ms"] = r.wall_time_ms;
  j["success"] = r.success ? nlohmann::json(*r.success) : nlohmann::json(nullptr);
  if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
  std::vector<Index> support(r.final.x.support.begin(), r.final.x.support.end());
  std::vector<double> values;
  for (Index i : support) values.push_back(r.final.x.entries[i]);
  j["x"] = {{"n", r.final.x.length()}, {"support", support}, {"values", values}};
  j["objective_history"] = r.objective_history;
  if (r.rel_error_history) j["rel_error_history"] = *r.rel_error_history;
  if (!r.pre_pursuit_objective_history.empty()) {
    j["pre_pursuit_objective_history"] = r.pre_pursuit_objective_history;
  }
  if (!r.qp_objective_history.empty()) j["qp_objective_history"] = r.qp_objective_history;
  return j;
}

inline nlohmann::json to_json(const theory::TheoremReport& r, const theory::TheoryInputs& in) {
  nlohmann::json j;
  j["theorem"] = theory::to_string(r.theorem);
  j["inputs"] = {{"n", in.n},           {"k", in.k},
                 {"delta_q", in.delta_q}, {"delta_k", in.delta_k},
                 {"delta_2k", in.delta_2k}, {"delta_3k", in.delta_3k},
                 {"lambda", in.lambda}};
  j["delta_threshold"] = r.delta_threshold;
  j["h_at_threshold"] = r.polynomial_at_threshold;
  if (r.theorem == theory::Theorem::CNOT_T39) {
    j["beta_star"] = r.delta_threshold;
    j["h_at_beta_star"] = r.polynomial_at_threshold;
  }
  j["lambda_interval"] = {{"lo", number(r.lambda_interval.lo)},
                          {"hi", number(r.lambda_interval.hi)},
                          {"empty", r.lambda_interval.empty()}};
  j["rho"] = number(r.rho);
  j["tau"] = number(r.tau);
  j["conditions_met"] = r.conditions_met;
  return j;
}

// ---------------------------------------------------------------------------
// SVG line charts: 800x600 viewBox, one polyline per series.

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

inline std::string svg_line_chart(const std::vector<Series>& series, const std::string& title,
                                  const std::string& xlabel, const std::string& ylabel) {
  constexpr double W = 800, H = 600, L = 80, R = 160, T = 50, B = 70;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (auto [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  const double pw = W - L - R;
  const double ph = H - T - B;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return T + (1.0 - (y - y0) / (y1 - y0)) * ph; };
  auto f = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  auto tick = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return std::string(buf);
  };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"800\" height=\"600\" "
       "viewBox=\"0 0 800 600\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
  s += "<text x=\"" + f(L + pw / 2) + "\" y=\"30\" text-anchor=\"middle\" font-size=\"18\">" +
       xml_escape(title) + "</text>\n";
  s += "<line x1=\"" + f(L) + "\" y1=\"" + f(T + ph) + "\" x2=\"" + f(L + pw) + "\" y2=\"" +
       f(T + ph) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + f(L) + "\" y1=\"" + f(T) + "\" x2=\"" + f(L) + "\" y2=\"" + f(T + ph) +
       "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5.0;
    const double yv = y0 + (y1 - y0) * i / 5.0;
    s += "<text x=\"" + f(px(xv)) + "\" y=\"" + f(T + ph + 20) +
         "\" text-anchor=\"middle\" font-size=\"12\">" + tick(xv) + "</text>\n";
    s += "<text x=\"" + f(L - 8) + "\" y=\"" + f(py(yv) + 4) +
         "\" text-anchor=\"end\" font-size=\"12\">" + tick(yv) + "</text>\n";
  }
  s += "<text x=\"" + f(L + pw / 2) + "\" y=\"" + f(H - 20) +
       "\" text-anchor=\"middle\" font-size=\"14\">" + xml_escape(xlabel) + "</text>\n";
  s += "<text x=\"20\" y=\"" + f(T + ph / 2) + "\" text-anchor=\"middle\" font-size=\"14\" "
       "transform=\"rotate(-90 20 " + f(T + ph / 2) + ")\">" + xml_escape(ylabel) + "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = colors[i % 8];
    std::string pts;
    for (auto [x, y] : series[i].points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (!pts.empty()) pts += ' ';
      pts += f(px(x)) + "," + f(py(y));
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
         "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
    const double ly = T + 20.0 * static_cast<double>(i + 1);
    s += "<text x=\"" + f(L + pw + 15) + "\" y=\"" + f(ly) + "\" font-size=\"12\" fill=\"" +
         color + "\">" + xml_escape(series[i].name) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace cnt::cli
