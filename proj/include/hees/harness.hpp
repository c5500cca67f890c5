#pragma once

// Experiment harness: flat key=value config parsing, seeded (optionally
// parallel) runs, per-iteration median aggregation, and CSV emission.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hees/diagnostics.hpp"
#include "hees/errors.hpp"
#include "hees/objectives.hpp"
#include "hees/strategies.hpp"

namespace hees {

struct ProblemSpec {
  enum class Kind { sphere, ellipsoid };
  Kind kind = Kind::sphere;
  std::size_t d = 0;
  double condition = 1.0;
  bool rotated = false;
  bool normalize_det = true;
};

struct InitSpec {
  // empty: point at distance 1 on the diagonal; one entry v: the diagonal
  // point at distance |v|; d entries: explicit coordinates
  std::vector<double> m0;
  double sigma0 = 1.0;
  enum class A0Kind { identity, adapted } a0_kind = A0Kind::identity;
  double a0_condition = 1.0;
};

struct ExperimentConfig {
  Strategy algorithm = Strategy::one_plus_four;
  ProblemSpec problem;
  InitSpec init;
  std::uint64_t budget = 0;
  std::vector<std::uint64_t> seeds;
  std::uint64_t problem_seed = 1;  // fixes the rotated-ellipsoid instance
  StrategyParams params;
  std::string output;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<std::uint64_t> parse_u64(const std::string& s) {
  if (s.empty() || s[0] == '-' || s[0] == '+') return std::nullopt;
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<bool> parse_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  return std::nullopt;
}

inline std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(s);
  while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
  if (!s.empty() && s.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

/// Parses the line-oriented key=value config format. Blank lines and lines
/// starting with '#' are skipped; unknown and duplicate keys are rejected.
/// Defaults are materialized, so the returned config is fully specified.
inline ExperimentConfig parse_config(const std::string& text) {
  static const std::vector<std::string> known = {
      "algorithm", "problem", "d", "condition", "rotated", "normalize_det",
      "budget", "seeds", "sigma0", "m0", "A0", "problem_seed", "out",
      "c_sigma", "eta_A", "kappa_trust", "lambda_tilde", "c_s", "d_s"};

  std::map<std::string, std::string> kv;
  std::istringstream lines(text);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", line_no);
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line_no);
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ParseError("unknown key '" + key + "'", line_no);
    if (kv.count(key)) throw ParseError("duplicate key '" + key + "'", line_no);
    kv[key] = value;
  }

  const auto get = [&](const char* key) -> std::optional<std::string> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };

  ExperimentConfig cfg;

  const auto algorithm = get("algorithm");
  if (!algorithm) throw ValidationError("algorithm", "missing");
  if (*algorithm == "he_es") cfg.algorithm = Strategy::he_es;
  else if (*algorithm == "one_plus_four") cfg.algorithm = Strategy::one_plus_four;
  else if (*algorithm == "one_plus_one") cfg.algorithm = Strategy::one_plus_one;
  else throw ValidationError("algorithm", "expected he_es|one_plus_four|one_plus_one");

  const auto problem = get("problem");
  if (!problem) throw ValidationError("problem", "missing");
  if (*problem == "sphere") cfg.problem.kind = ProblemSpec::Kind::sphere;
  else if (*problem == "ellipsoid") cfg.problem.kind = ProblemSpec::Kind::ellipsoid;
  else throw ValidationError("problem", "expected sphere|ellipsoid");

  const auto d_raw = get("d");
  if (!d_raw) throw ValidationError("d", "missing");
  const auto d_val = detail::parse_u64(*d_raw);
  if (!d_val || *d_val == 0) throw ValidationError("d");
  cfg.problem.d = static_cast<std::size_t>(*d_val);
  const bool needs_pairs = cfg.algorithm != Strategy::one_plus_one;
  if (needs_pairs && cfg.problem.d < 2)
    throw ValidationError("d", "must be >= 2 for this algorithm");

  if (const auto v = get("condition")) {
    const auto c = detail::parse_double(*v);
    if (!c || *c < 1.0) throw ValidationError("condition");
    cfg.problem.condition = *c;
  }
  if (const auto v = get("rotated")) {
    const auto b = detail::parse_bool(*v);
    if (!b) throw ValidationError("rotated");
    cfg.problem.rotated = *b;
  }
  if (const auto v = get("normalize_det")) {
    const auto b = detail::parse_bool(*v);
    if (!b) throw ValidationError("normalize_det");
    cfg.problem.normalize_det = *b;
  }

  const auto budget = get("budget");
  if (!budget) throw ValidationError("budget", "missing");
  const auto b_val = detail::parse_u64(*budget);
  if (!b_val || *b_val == 0) throw ValidationError("budget");
  cfg.budget = *b_val;

  const auto seeds = get("seeds");
  if (!seeds) throw ValidationError("seeds", "missing");
  for (const std::string& s : detail::split_commas(*seeds)) {
    const auto v = detail::parse_u64(s);
    if (!v) throw ValidationError("seeds");
    cfg.seeds.push_back(*v);
  }
  if (cfg.seeds.empty()) throw ValidationError("seeds", "at least one required");

  if (const auto v = get("sigma0")) {
    const auto s = detail::parse_double(*v);
    if (!s || *s <= 0.0) throw ValidationError("sigma0");
    cfg.init.sigma0 = *s;
  }
  if (const auto v = get("m0")) {
    for (const std::string& s : detail::split_commas(*v)) {
      const auto x = detail::parse_double(s);
      if (!x) throw ValidationError("m0");
      cfg.init.m0.push_back(*x);
    }
    if (cfg.init.m0.size() != 1 && cfg.init.m0.size() != cfg.problem.d)
      throw ValidationError("m0", "expected 1 or d values");
  }
  if (const auto v = get("A0")) {
    if (*v == "identity") {
      cfg.init.a0_kind = InitSpec::A0Kind::identity;
    } else if (v->rfind("adapted:", 0) == 0) {
      const auto c = detail::parse_double(v->substr(8));
      if (!c || *c < 1.0) throw ValidationError("A0", "expected adapted:<condition>");
      if (cfg.problem.d < 2) throw ValidationError("A0", "adapted requires d >= 2");
      cfg.init.a0_kind = InitSpec::A0Kind::adapted;
      cfg.init.a0_condition = *c;
    } else {
      throw ValidationError("A0", "expected identity or adapted:<condition>");
    }
  }
  if (const auto v = get("problem_seed")) {
    const auto s = detail::parse_u64(*v);
    if (!s) throw ValidationError("problem_seed");
    cfg.problem_seed = *s;
  }
  if (const auto v = get("out")) cfg.output = *v;

  cfg.params = StrategyParams::defaults(cfg.problem.d);
  if (const auto v = get("lambda_tilde")) {
    const auto l = detail::parse_u64(*v);
    if (!l || *l < 2) throw ValidationError("lambda_tilde");
    cfg.params.he_es = HeEsParams::defaults(cfg.problem.d, static_cast<std::size_t>(*l));
  }
  if (const auto v = get("c_sigma")) {
    const auto c = detail::parse_double(*v);
    if (!c || *c <= 1.0) throw ValidationError("c_sigma");
    cfg.params.elitist.c_sigma = *c;
  }
  if (const auto v = get("eta_A")) {
    const auto e = detail::parse_double(*v);
    if (!e || *e <= 0.0 || *e > 1.0) throw ValidationError("eta_A");
    cfg.params.elitist.eta_a = *e;
    cfg.params.he_es.eta_a = *e;
  }
  if (const auto v = get("kappa_trust")) {
    const auto k = detail::parse_double(*v);
    if (!k || *k <= 1.0) throw ValidationError("kappa_trust");
    cfg.params.elitist.kappa_trust = *k;
    cfg.params.he_es.kappa_trust = *k;
  }
  if (const auto v = get("c_s")) {
    const auto c = detail::parse_double(*v);
    if (!c || *c <= 0.0 || *c >= 1.0) throw ValidationError("c_s");
    cfg.params.he_es.c_s = *c;
  }
  if (const auto v = get("d_s")) {
    const auto dsv = detail::parse_double(*v);
    if (!dsv || *dsv <= 0.0) throw ValidationError("d_s");
    cfg.params.he_es.d_s = *dsv;
  }

  return cfg;
}

inline QuadraticProblem build_problem(const ExperimentConfig& cfg) {
  if (cfg.problem.kind == ProblemSpec::Kind::sphere)
    return QuadraticProblem(Matrix::identity(cfg.problem.d), Vector(cfg.problem.d), 0.0);
  RngStream rng(cfg.problem_seed);
  return make_ellipsoid(cfg.problem.d, cfg.problem.condition,
                        cfg.problem.normalize_det, rng, cfg.problem.rotated);
}

/// Symmetric factor A0 with C0 = A0^T A0 of unit determinant and the given
/// condition number: geometric eigenvalues in a random orthonormal basis.
inline Matrix adapted_factor(std::size_t d, double condition, RngStream& rng) {
  const double log_cond = std::log(condition);
  const OrthogonalSampleBlock basis = sample_orthogonal(rng, d);
  Matrix a0(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double log_lambda =
        log_cond * (static_cast<double>(i) / static_cast<double>(d - 1) - 0.5);
    const Vector u = (1.0 / basis.norms[i]) * basis.directions[i];
    add_scaled_outer(a0, std::exp(0.5 * log_lambda), u);
  }
  return a0;
}

inline StrategyState initial_state(const ExperimentConfig& cfg, RngStream& init_rng) {
  const std::size_t d = cfg.problem.d;
  Vector m0(d);
  if (cfg.init.m0.empty()) {
    const double coord = 1.0 / std::sqrt(static_cast<double>(d));
    for (std::size_t i = 0; i < d; ++i) m0[i] = coord;
  } else if (cfg.init.m0.size() == 1) {
    const double coord = cfg.init.m0[0] / std::sqrt(static_cast<double>(d));
    for (std::size_t i = 0; i < d; ++i) m0[i] = coord;
  } else {
    m0 = Vector(cfg.init.m0);
  }
  Matrix a0 = cfg.init.a0_kind == InitSpec::A0Kind::adapted
                  ? adapted_factor(d, cfg.init.a0_condition, init_rng)
                  : Matrix::identity(d);
  return make_initial_state(std::move(m0), cfg.init.sigma0, std::move(a0));
}

/// One seeded run: substream 0 initializes A0, substream 1 drives the loop.
inline RunTrace run_seed(const ExperimentConfig& cfg, const QuadraticProblem& q,
                         std::uint64_t seed) {
  RngStream root(seed);
  RngStream init_rng = root.split(0);
  RngStream run_rng = root.split(1);
  RunTrace trace = run(cfg.algorithm, q, initial_state(cfg, init_rng), run_rng,
                       cfg.budget, cfg.params);
  trace.seed = seed;
  return trace;
}

/// Runs every seed of the config, optionally on `parallel` threads. Output
/// order matches seed order regardless of execution order; a failing run is
/// recorded in its trace without aborting the siblings.
inline std::vector<RunTrace> run_experiment(const ExperimentConfig& cfg,
                                            unsigned parallel = 1) {
  const QuadraticProblem q = build_problem(cfg);
  std::vector<RunTrace> traces(cfg.seeds.size());

  const auto work = [&](std::size_t i) {
    try {
      traces[i] = run_seed(cfg, q, cfg.seeds[i]);
    } catch (const std::exception& e) {
      traces[i].seed = cfg.seeds[i];
      traces[i].error = e.what();
    }
  };

  if (parallel <= 1 || cfg.seeds.size() <= 1) {
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) work(i);
    return traces;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const unsigned n_threads = std::min<std::size_t>(parallel, cfg.seeds.size());
  pool.reserve(n_threads);
  for (unsigned w = 0; w < n_threads; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= cfg.seeds.size()) return;
        work(i);
      }
    });
  }
  for (std::thread& th : pool) th.join();
  return traces;
}

namespace detail {

enum class Column { f_m, sigma, det_c, tr_normalized, kappa_hc, f_mu, success };

inline Column column_from_name(const std::string& name) {
  if (name == "f_m") return Column::f_m;
  if (name == "sigma") return Column::sigma;
  if (name == "det_C") return Column::det_c;
  if (name == "tr_normalized") return Column::tr_normalized;
  if (name == "kappa_HC") return Column::kappa_hc;
  if (name == "f_mu") return Column::f_mu;
  if (name == "success") return Column::success;
  throw UnknownColumn("unknown column '" + name + "'");
}

inline double column_value(const TraceRecord& r, Column c) {
  switch (c) {
    case Column::f_m: return r.f_m;
    case Column::sigma: return r.sigma;
    case Column::det_c: return r.det_c;
    case Column::tr_normalized: return r.tr_normalized;
    case Column::kappa_hc: return r.kappa_hc;
    case Column::f_mu: return r.f_mu;
    case Column::success: return r.success ? 1.0 : 0.0;
  }
  return 0.0;
}

/// Lower median: for even counts the smaller of the two central values.
inline double lower_median(std::vector<double>& v) {
  const std::size_t k = (v.size() - 1) / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

}  // namespace detail

/// Per-iteration lower medians of one trace column, aggregated over all
/// traces that reach the iteration.
inline std::vector<double> aggregate_median(std::span<const RunTrace> traces,
                                            const std::string& column) {
  const detail::Column col = detail::column_from_name(column);
  std::size_t longest = 0;
  for (const RunTrace& tr : traces) longest = std::max(longest, tr.records.size());
  std::vector<double> medians;
  medians.reserve(longest);
  std::vector<double> values;
  for (std::size_t i = 0; i < longest; ++i) {
    values.clear();
    for (const RunTrace& tr : traces)
      if (i < tr.records.size()) values.push_back(detail::column_value(tr.records[i], col));
    medians.push_back(detail::lower_median(values));
  }
  return medians;
}

inline constexpr const char* kCsvHeader =
    "run_seed,t,f_m,sigma,det_C,tr_normalized,kappa_HC,f_mu,success";

namespace detail {
inline void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}
}  // namespace detail

/// One row per (seed, iteration), reals with 17 significant digits, LF line
/// ends. Failed runs contribute their recorded rows plus a trailing
/// '#'-comment noting the error.
inline std::string csv_string(std::span<const RunTrace> traces) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const RunTrace& tr : traces) {
    for (const TraceRecord& r : tr.records) {
      out += std::to_string(tr.seed);
      out += ',';
      out += std::to_string(r.t);
      for (const double v : {r.f_m, r.sigma, r.det_c, r.tr_normalized, r.kappa_hc, r.f_mu}) {
        out += ',';
        detail::append_double(out, v);
      }
      out += r.success ? ",1\n" : ",0\n";
    }
  }
  for (const RunTrace& tr : traces) {
    if (!tr.error.empty()) {
      out += "# error seed=";
      out += std::to_string(tr.seed);
      out += ": ";
      out += tr.error;
      out += '\n';
    }
  }
  return out;
}

/// Aggregated counterpart of csv_string: same schema with the literal
/// 'median' in the run_seed column.
inline std::string csv_median_string(std::span<const RunTrace> traces) {
  static const char* columns[] = {"f_m", "sigma", "det_C", "tr_normalized",
                                  "kappa_HC", "f_mu", "success"};
  std::vector<std::vector<double>> medians;
  medians.reserve(7);
  for (const char* c : columns) medians.push_back(aggregate_median(traces, c));
  std::string out = kCsvHeader;
  out += '\n';
  const std::size_t rows = medians.front().size();
  for (std::size_t i = 0; i < rows; ++i) {
    out += "median,";
    out += std::to_string(i + 1);
    for (const auto& col : medians) {
      out += ',';
      detail::append_double(out, col[i]);
    }
    out += '\n';
  }
  return out;
}

inline void emit_csv(std::span<const RunTrace> traces, std::ostream& os) {
  os << csv_string(traces);
  if (!os) throw IoError("emit_csv: stream write failed");
}

inline void emit_csv(std::span<const RunTrace> traces, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("emit_csv: cannot open '" + path + "'");
  emit_csv(traces, f);
  f.flush();
  if (!f) throw IoError("emit_csv: write failed for '" + path + "'");
}

inline void emit_csv_median(std::span<const RunTrace> traces, std::ostream& os) {
  os << csv_median_string(traces);
  if (!os) throw IoError("emit_csv_median: stream write failed");
}

inline void emit_csv_median(std::span<const RunTrace> traces, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("emit_csv_median: cannot open '" + path + "'");
  emit_csv_median(traces, f);
  f.flush();
  if (!f) throw IoError("emit_csv_median: write failed for '" + path + "'");
}

}  // namespace hees
