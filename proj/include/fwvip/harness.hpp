#pragma once

// Experiment driver: reads a JSON config, builds the problem, runs each
// solver, and streams one CSV row per iteration.
//
// CSV columns, in order:
//   solver, iter, cum_lmo, cum_proj, cum_g_evals, gap, wardrop,
//   dist_to_oracle, wall_ns, cum_diag, natural_residual
// `gap` is Delta_k/S_k for FW-VIP and the natural residual for the projected
// methods. Optional metrics are left empty when not requested. wall_ns is 0
// unless `record_wall_time` is set, so reruns produce byte-identical files.

#include <Eigen/Dense>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fwvip/baselines.hpp"
#include "fwvip/counters.hpp"
#include "fwvip/geometry.hpp"
#include "fwvip/operators.hpp"
#include "fwvip/tap.hpp"
#include "fwvip/vip_fw.hpp"

namespace fwvip::harness {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kFwVipName = "FW-VIP";

struct AffineSpec {
  Index dim = 20;
  double mu = 1.0;
  double skew_scale = 5.0;
  std::uint64_t seed = 7;
};

struct TapSpec {
  tap::DemandMap demands = tap::default_demands();
  double kappa = 0.5;
};

struct SolverSpec {
  std::string name;
  nlohmann::json parameters = nlohmann::json::object();
};

struct Budgets {
  long max_outer = 1000;
  long max_inner = 100000;
  long max_oracle_calls = 1000000000;
};

struct ExperimentConfig {
  std::variant<AffineSpec, TapSpec> problem = AffineSpec{};
  std::vector<SolverSpec> solvers;
  double epsilon = 1e-6;
  Budgets budgets;
  // Any of "wardrop", "dist_to_oracle", "natural_residual".
  std::vector<std::string> metrics;
  std::string output_path = "results.csv";
  std::uint64_t seed = 0;
  // Known constants; estimated by sampling when absent.
  std::optional<double> mu;
  std::optional<double> L;
  long estimate_samples = 2000;
  bool count_diagnostics = false;
  bool record_wall_time = false;
  long record_every = 1;

  bool wants(const std::string& metric) const {
    for (const auto& m : metrics) {
      if (m == metric) return true;
    }
    return false;
  }
};

namespace detail {

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> keys,
                           const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

inline bool known_solver(const std::string& name) {
  return name == kFwVipName || parse_baseline(name).has_value();
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  using detail::get_or;
  detail::reject_unknown(j,
                         {"problem", "solvers", "epsilon", "budgets", "metrics", "output_path", "seed",
                          "constants", "estimate_samples", "count_diagnostics", "record_wall_time",
                          "record_every"},
                         "config");
  ExperimentConfig cfg;
  if (!j.contains("problem")) throw ConfigError("config needs a 'problem'");
  const auto& prob = j.at("problem");
  detail::reject_unknown(prob, {"affine", "tap"}, "problem");
  if (prob.size() != 1) throw ConfigError("problem must have exactly one of 'affine' or 'tap'");
  if (prob.contains("affine")) {
    const auto& a = prob.at("affine");
    detail::reject_unknown(a, {"dim", "mu", "skew_scale", "seed"}, "problem.affine");
    AffineSpec s;
    s.dim = get_or<Index>(a, "dim", s.dim);
    s.mu = get_or<double>(a, "mu", s.mu);
    s.skew_scale = get_or<double>(a, "skew_scale", s.skew_scale);
    s.seed = get_or<std::uint64_t>(a, "seed", s.seed);
    if (s.dim < 1) throw ConfigError("problem.affine.dim must be >= 1");
    if (!(s.mu > 0.0)) throw ConfigError("problem.affine.mu must be > 0");
    cfg.problem = s;
  } else {
    const auto& t = prob.at("tap");
    detail::reject_unknown(t, {"demands", "kappa"}, "problem.tap");
    TapSpec s;
    s.kappa = get_or<double>(t, "kappa", s.kappa);
    if (t.contains("demands")) {
      s.demands.clear();
      for (const auto& d : t.at("demands")) {
        detail::reject_unknown(d, {"origin", "dest", "demand"}, "problem.tap.demands[]");
        const int o = get_or<int>(d, "origin", 0);
        const int de = get_or<int>(d, "dest", 0);
        s.demands[{o, de}] = get_or<double>(d, "demand", -1.0);
      }
    }
    cfg.problem = s;
  }

  if (!j.contains("solvers") || !j.at("solvers").is_array() || j.at("solvers").empty()) {
    throw ConfigError("config needs a non-empty 'solvers' list");
  }
  for (const auto& s : j.at("solvers")) {
    SolverSpec spec;
    if (s.is_string()) {
      spec.name = s.get<std::string>();
    } else {
      detail::reject_unknown(s, {"name", "parameters"}, "solvers[]");
      spec.name = get_or<std::string>(s, "name", "");
      if (s.contains("parameters")) spec.parameters = s.at("parameters");
    }
    if (!detail::known_solver(spec.name)) throw ConfigError("unknown solver '" + spec.name + "'");
    cfg.solvers.push_back(std::move(spec));
  }

  cfg.epsilon = get_or<double>(j, "epsilon", cfg.epsilon);
  if (!(cfg.epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (j.contains("budgets")) {
    const auto& b = j.at("budgets");
    detail::reject_unknown(b, {"max_outer", "max_inner", "max_oracle_calls"}, "budgets");
    cfg.budgets.max_outer = get_or<long>(b, "max_outer", cfg.budgets.max_outer);
    cfg.budgets.max_inner = get_or<long>(b, "max_inner", cfg.budgets.max_inner);
    cfg.budgets.max_oracle_calls = get_or<long>(b, "max_oracle_calls", cfg.budgets.max_oracle_calls);
    if (cfg.budgets.max_outer < 0 || cfg.budgets.max_inner < 0 || cfg.budgets.max_oracle_calls < 0) {
      throw ConfigError("budgets must be >= 0");
    }
  }
  cfg.metrics = get_or<std::vector<std::string>>(j, "metrics", {});
  for (const auto& m : cfg.metrics) {
    if (m != "wardrop" && m != "dist_to_oracle" && m != "natural_residual") {
      throw ConfigError("unknown metric '" + m + "'");
    }
  }
  if (cfg.wants("wardrop") && !std::holds_alternative<TapSpec>(cfg.problem)) {
    throw ConfigError("metric 'wardrop' needs a tap problem");
  }
  cfg.output_path = get_or<std::string>(j, "output_path", cfg.output_path);
  cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
  if (j.contains("constants")) {
    const auto& c = j.at("constants");
    detail::reject_unknown(c, {"mu", "L"}, "constants");
    if (c.contains("mu")) cfg.mu = get_or<double>(c, "mu", 0.0);
    if (c.contains("L")) cfg.L = get_or<double>(c, "L", 0.0);
  }
  cfg.estimate_samples = get_or<long>(j, "estimate_samples", cfg.estimate_samples);
  if (cfg.estimate_samples < 2) throw ConfigError("estimate_samples must be >= 2");
  cfg.count_diagnostics = get_or<bool>(j, "count_diagnostics", cfg.count_diagnostics);
  cfg.record_wall_time = get_or<bool>(j, "record_wall_time", cfg.record_wall_time);
  cfg.record_every = get_or<long>(j, "record_every", cfg.record_every);
  if (cfg.record_every < 1) throw ConfigError("record_every must be >= 1");
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------

struct ProblemInfo {
  std::string kind;
  double mu = 0.0;
  double L = 0.0;
  bool estimated = false;
  std::optional<ConstantsEstimate> estimate;
  double gamma() const { return L / mu; }
};

struct BuiltProblem {
  VIProblem vi;
  std::optional<tap::TapInstance> tap;
  ProblemInfo info;
};

inline BuiltProblem build_problem(const ExperimentConfig& cfg) {
  try {
    if (const auto* a = std::get_if<AffineSpec>(&cfg.problem)) {
      AffineInstance inst = make_affine_instance(a->dim, a->mu, a->skew_scale, a->seed);
      BuiltProblem bp{VIProblem{inst.op.field(), inst.box, inst.mu, inst.L}, std::nullopt, {}};
      bp.info.kind = "affine";
      bp.info.mu = inst.mu;
      bp.info.L = inst.L;
      if (cfg.mu) bp.vi.mu = bp.info.mu = *cfg.mu;
      if (cfg.L) bp.vi.L = bp.info.L = *cfg.L;
      bp.vi.validate();
      return bp;
    }
    const auto& t = std::get<TapSpec>(cfg.problem);
    tap::TapInstance inst = tap::build_instance(t.demands, t.kappa);
    BuiltProblem bp{VIProblem{tap::path_field(inst), inst.feasible_set(), 0.0, 0.0}, inst, {}};
    bp.info.kind = "tap";
    if (!cfg.mu || !cfg.L) {
      const ConstantsEstimate est = estimate_constants(bp.vi.g, bp.vi.set, cfg.estimate_samples, cfg.seed);
      bp.info.estimate = est;
      bp.info.estimated = true;
      bp.info.mu = est.mu_hat;
      bp.info.L = est.L_hat;
    }
    if (cfg.mu) bp.info.mu = *cfg.mu;
    if (cfg.L) bp.info.L = *cfg.L;
    bp.vi.mu = bp.info.mu;
    bp.vi.L = bp.info.L;
    bp.vi.validate();
    return bp;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

// High-accuracy reference solution by extragradient with stepsize 0.5/L.
inline Point reference_solution(const VIProblem& p, double tol = 1e-14, long max_iter = 2000000) {
  Point x = center(p.set);
  const double alpha = 0.5 / p.L;
  for (long k = 0; k < max_iter; ++k) {
    const Point y = project(p.set, x - alpha * p.g(x));
    Point next = project(p.set, x - alpha * p.g(y));
    const double step = (next - x).norm();
    x = std::move(next);
    if (step <= tol * (1.0 + x.norm())) break;
  }
  return x;
}

// ---------------------------------------------------------------------------

struct RunRecord {
  std::string solver;
  long iter = 0;
  long cum_lmo = 0;
  long cum_proj = 0;
  long cum_g_evals = 0;
  double gap = 0.0;
  std::optional<double> wardrop;
  std::optional<double> dist_to_oracle;
  long wall_ns = 0;
  long cum_diag = 0;
  std::optional<double> natural_residual;
};

inline const char* kCsvHeader =
    "solver,iter,cum_lmo,cum_proj,cum_g_evals,gap,wardrop,dist_to_oracle,wall_ns,cum_diag,"
    "natural_residual";

namespace detail {

inline std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_opt(const std::optional<double>& v) { return v ? fmt_real(*v) : std::string(); }

}  // namespace detail

inline void write_record(std::ostream& out, const RunRecord& r) {
  out << r.solver << ',' << r.iter << ',' << r.cum_lmo << ',' << r.cum_proj << ',' << r.cum_g_evals
      << ',' << detail::fmt_real(r.gap) << ',' << detail::fmt_opt(r.wardrop) << ','
      << detail::fmt_opt(r.dist_to_oracle) << ',' << r.wall_ns << ',' << r.cum_diag << ','
      << detail::fmt_opt(r.natural_residual) << '\n';
}

struct SolverSummary {
  std::string solver;
  bool converged = false;
  long iterations = 0;
  double final_gap = 0.0;
  OracleCounters counters;
  long wall_ns = 0;
  Point final_iterate;
  std::optional<double> wardrop;
  std::optional<double> dist_to_oracle;
  long inner_iterations = 0;
  long degraded_iterations = 0;
};

struct ExperimentResult {
  ProblemInfo info;
  std::vector<SolverSummary> solvers;
  bool all_converged() const {
    for (const auto& s : solvers) {
      if (!s.converged) return false;
    }
    return true;
  }
};

namespace detail {

// Shared per-iteration bookkeeping: metric evaluation and record emission.
class Recorder {
 public:
  Recorder(const ExperimentConfig& cfg, const BuiltProblem& bp, const std::optional<Point>& x_star,
           std::ostream& csv)
      : cfg_(cfg), bp_(bp), x_star_(x_star), csv_(csv) {}

  RunRecord make(const std::string& solver, long iter, const OracleCounters& c, double gap,
                 const Point& x, long wall_ns, OracleCounters& diag_sink) const {
    RunRecord r;
    r.solver = solver;
    r.iter = iter;
    if (cfg_.wants("natural_residual")) {
      r.natural_residual = natural_residual(bp_.vi, x, bp_.vi.g(x), diag_sink);
    }
    if (cfg_.wants("wardrop")) r.wardrop = tap::wardrop_residual(*bp_.tap, x);
    if (x_star_) r.dist_to_oracle = (x - *x_star_).norm();
    r.cum_lmo = c.lmo;
    r.cum_proj = c.proj;
    r.cum_g_evals = c.g_evals;
    r.cum_diag = diag_sink.diag;
    if (cfg_.count_diagnostics) r.cum_proj += diag_sink.diag;
    r.gap = gap;
    r.wall_ns = cfg_.record_wall_time ? wall_ns : 0;
    return r;
  }

  void emit(const RunRecord& r, bool force) {
    if (force || r.iter % cfg_.record_every == 0) write_record(csv_, r);
  }

 private:
  const ExperimentConfig& cfg_;
  const BuiltProblem& bp_;
  const std::optional<Point>& x_star_;
  std::ostream& csv_;
};

inline VipOptions fwvip_options(const ExperimentConfig& cfg, const nlohmann::json& params) {
  reject_unknown(params,
                 {"inner_epsilon", "path", "certificate", "early_stop", "border_distance_hint",
                  "retain_history"},
                 "FW-VIP parameters");
  VipOptions opt;
  opt.epsilon = cfg.epsilon;
  opt.max_outer = cfg.budgets.max_outer;
  opt.max_inner = cfg.budgets.max_inner;
  if (params.contains("inner_epsilon")) opt.inner_epsilon = get_or<double>(params, "inner_epsilon", 0.0);
  if (opt.inner_epsilon && !(*opt.inner_epsilon > 0.0)) throw ConfigError("inner_epsilon must be > 0");
  const auto path = get_or<std::string>(params, "path", "projection_free");
  if (path == "projection_free") {
    opt.path = SubproblemPath::ProjectionFree;
  } else if (path == "closed_form") {
    opt.path = SubproblemPath::ClosedForm;
  } else {
    throw ConfigError("unknown FW-VIP path '" + path + "'");
  }
  const auto cert = get_or<std::string>(params, "certificate", "projection");
  if (cert == "projection") {
    opt.certificate = CertificateMode::ProjectionDiagnostic;
  } else if (cert == "fw") {
    opt.certificate = CertificateMode::FwGapBound;
  } else {
    throw ConfigError("unknown FW-VIP certificate '" + cert + "'");
  }
  opt.early_stop = get_or<bool>(params, "early_stop", false);
  if (params.contains("border_distance_hint")) {
    opt.border_distance_hint = get_or<double>(params, "border_distance_hint", 0.0);
  }
  opt.retain_history = get_or<bool>(params, "retain_history", false);
  return opt;
}

inline SolverSummary run_fwvip(const ExperimentConfig& cfg, const BuiltProblem& bp,
                               const SolverSpec& spec, Recorder& rec) {
  VipOptions opt = fwvip_options(cfg, spec.parameters);
  OracleCounters diag_extra;
  opt.on_iteration = [&](const VipIteration& it) {
    // Certificate projections live in it.counters.diag; metric projections in diag_extra.
    OracleCounters sink = diag_extra;
    sink.diag += it.counters.diag;
    RunRecord r = rec.make(kFwVipName, it.k, it.counters, it.delta_over_S, it.y_tilde, it.wall_ns, sink);
    diag_extra.diag = sink.diag - it.counters.diag;
    const bool last = it.delta_over_S <= opt.epsilon || it.k == opt.max_outer;
    rec.emit(r, last);
  };
  SolverSummary s;
  s.solver = kFwVipName;
  const VipResult res = solve_vip(bp.vi, opt);
  s.converged = res.converged;
  s.iterations = res.iterations;
  s.final_gap = res.delta_over_S;
  s.counters = res.counters;
  s.counters.diag += diag_extra.diag;
  s.wall_ns = res.wall_ns;
  s.final_iterate = res.y_tilde;
  s.inner_iterations = res.inner_iterations;
  s.degraded_iterations = res.degraded_iterations;
  return s;
}

inline BaselineConfig baseline_config(const SolverSpec& spec, const VIProblem& p) {
  const BaselineMethod method = *parse_baseline(spec.name);
  reject_unknown(spec.parameters, {"alpha", "zeta"}, spec.name + " parameters");
  std::optional<double> alpha;
  std::optional<double> zeta;
  if (spec.parameters.contains("alpha")) alpha = get_or<double>(spec.parameters, "alpha", 0.0);
  if (spec.parameters.contains("zeta")) zeta = get_or<double>(spec.parameters, "zeta", 0.0);
  try {
    return make_baseline_config(method, p.mu, p.L, alpha, zeta);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

inline SolverSummary run_baseline(const ExperimentConfig& cfg, const BuiltProblem& bp,
                                  const SolverSpec& spec, Recorder& rec) {
  const BaselineMethod method = *parse_baseline(spec.name);
  const BaselineConfig bc = baseline_config(spec, bp.vi);
  using Clock = std::chrono::steady_clock;
  BaselineRunner runner(bp.vi, bc, center(bp.vi.set));
  OracleCounters diag;
  long wall_ns = 0;
  SolverSummary s;
  s.solver = spec.name;

  auto gap_now = [&] {
    const Point& x = runner.iterate();
    return natural_residual(bp.vi, x, bp.vi.g(x), diag);
  };
  double gap = gap_now();
  const auto per = per_step_counts(method);
  for (;;) {
    const long k = runner.iterations();
    const auto& c = runner.counters();
    const bool done = gap <= cfg.epsilon;
    const long calls = c.lmo + c.proj + c.g_evals;
    const bool out_of_budget = k >= cfg.budgets.max_outer ||
                               calls + per.proj + per.g_evals > cfg.budgets.max_oracle_calls;
    RunRecord r = rec.make(spec.name, k, c, gap, runner.iterate(), wall_ns, diag);
    rec.emit(r, done || out_of_budget);
    if (done || out_of_budget) {
      s.converged = done;
      break;
    }
    const auto t0 = Clock::now();
    runner.step();
    wall_ns += std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count();
    gap = gap_now();
  }
  s.iterations = runner.iterations();
  s.final_gap = gap;
  s.counters = runner.counters();
  s.counters.diag = diag.diag;
  s.wall_ns = wall_ns;
  s.final_iterate = runner.iterate();
  return s;
}

}  // namespace detail

// Runs every solver of `cfg` in order and writes the CSV to `csv`.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream& csv) {
  for (const auto& s : cfg.solvers) {
    if (!detail::known_solver(s.name)) throw ConfigError("unknown solver '" + s.name + "'");
  }
  const BuiltProblem bp = build_problem(cfg);
  // Validate every solver's parameters before any run.
  for (const auto& s : cfg.solvers) {
    if (s.name == kFwVipName) {
      (void)detail::fwvip_options(cfg, s.parameters);
    } else {
      (void)detail::baseline_config(s, bp.vi);
    }
  }
  std::optional<Point> x_star;
  if (cfg.wants("dist_to_oracle")) x_star = reference_solution(bp.vi);

  ExperimentResult result;
  result.info = bp.info;
  csv << kCsvHeader << '\n';
  detail::Recorder rec(cfg, bp, x_star, csv);
  for (const auto& spec : cfg.solvers) {
    SolverSummary s = spec.name == kFwVipName ? detail::run_fwvip(cfg, bp, spec, rec)
                                              : detail::run_baseline(cfg, bp, spec, rec);
    if (bp.tap) s.wardrop = tap::wardrop_residual(*bp.tap, s.final_iterate);
    if (x_star) s.dist_to_oracle = (s.final_iterate - *x_star).norm();
    result.solvers.push_back(std::move(s));
  }
  return result;
}

// Sidecar metadata: constants (and whether they were estimated), seeds, and
// the per-solver summary.
inline nlohmann::ordered_json summary_json(const ExperimentConfig& cfg, const ExperimentResult& r) {
  nlohmann::ordered_json j;
  j["problem"] = r.info.kind;
  j["seed"] = cfg.seed;
  j["epsilon"] = cfg.epsilon;
  j["mu"] = r.info.mu;
  j["L"] = r.info.L;
  j["gamma"] = r.info.gamma();
  j["constants_estimated"] = r.info.estimated;
  if (r.info.estimate) {
    j["estimate"] = {{"n_samples", r.info.estimate->n_samples},
                     {"raw_mu", r.info.estimate->raw_mu},
                     {"raw_L", r.info.estimate->raw_L},
                     {"non_monotone", r.info.estimate->non_monotone}};
  }
  auto solvers = nlohmann::ordered_json::array();
  for (const auto& s : r.solvers) {
    nlohmann::ordered_json e;
    e["solver"] = s.solver;
    e["converged"] = s.converged;
    e["iterations"] = s.iterations;
    e["final_gap"] = s.final_gap;
    e["total_lmo"] = s.counters.lmo;
    e["total_proj"] = s.counters.proj;
    e["total_g_evals"] = s.counters.g_evals;
    e["total_diag"] = s.counters.diag;
    e["wall_ns"] = cfg.record_wall_time ? s.wall_ns : 0;
    if (s.wardrop) e["wardrop"] = *s.wardrop;
    if (s.dist_to_oracle) e["dist_to_oracle"] = *s.dist_to_oracle;
    if (s.solver == kFwVipName) {
      e["inner_iterations"] = s.inner_iterations;
      e["degraded_iterations"] = s.degraded_iterations;
    }
    e["final_iterate"] = std::vector<double>(s.final_iterate.data(),
                                             s.final_iterate.data() + s.final_iterate.size());
    solvers.push_back(e);
  }
  j["solvers"] = solvers;
  return j;
}

inline std::string summary_line(const SolverSummary& s) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-6s %s iters=%ld gap=%.3e lmo=%ld proj=%ld g=%ld wall=%.3fs",
                s.solver.c_str(), s.converged ? "converged    " : "NOT converged", s.iterations,
                s.final_gap, s.counters.lmo, s.counters.proj, s.counters.g_evals,
                static_cast<double>(s.wall_ns) * 1e-9);
  return buf;
}

// Runs the experiment and writes `output_path` and `output_path.meta.json`.
inline ExperimentResult run_experiment_to_file(const ExperimentConfig& cfg) {
  std::ostringstream csv;
  ExperimentResult r = run_experiment(cfg, csv);
  std::ofstream out(cfg.output_path, std::ios::binary);
  if (!out) throw ConfigError("cannot write output file '" + cfg.output_path + "'");
  out << csv.str();
  std::ofstream meta(cfg.output_path + ".meta.json", std::ios::binary);
  if (!meta) throw ConfigError("cannot write '" + cfg.output_path + ".meta.json'");
  meta << summary_json(cfg, r).dump(2) << '\n';
  return r;
}

}  // namespace fwvip::harness
