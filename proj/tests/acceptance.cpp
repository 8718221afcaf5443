// Acceptance suite: one PASS/FAIL line per criterion. `acceptance` runs all
// of them; `acceptance N` runs criterion N only. Exit code 0 iff every
// selected criterion passed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fwvip/harness.hpp"
#include "oracles.hpp"
#include "saddle_fixtures.hpp"

using namespace fwvip;
using nlohmann::json;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

constexpr double kTiny = std::numeric_limits<double>::min();

// Affine instance used throughout: dim 20, mu 1, skew_scale 5, seed 7.
VIProblem affine_problem() {
  const AffineInstance a = make_affine_instance(20, 1.0, 5.0, 7);
  return VIProblem{a.op.field(), a.box, a.mu, a.L};
}

harness::BuiltProblem tap_problem() {
  harness::ExperimentConfig cfg;
  cfg.problem = harness::TapSpec{};
  return harness::build_problem(cfg);
}

// 1. Inner FW on subproblems taken from exact outer states versus the
// closed-form projections.
Outcome inner_oracle_equivalence() {
  constexpr int kStatesPerInstance = 25;
  constexpr long kInnerIterations = 8000000;
  const auto t0 = std::chrono::steady_clock::now();
  const VIProblem affine = affine_problem();
  const auto tap = tap_problem();
  double worst = 0.0;
  int solved = 0;
  std::uint64_t seed = 100;
  for (const VIProblem* p : {&affine, &tap.vi}) {
    CounterRng rng(seed++, 0);
    const Point y0 = sample(p->set, rng);
    OuterState st = initial_state(*p, y0, p->g(y0));
    for (int k = 0; k < kStatesPerInstance; ++k) {
      const Point x_star = x_subproblem_solution(st, p->mu, p->set);
      const Point g_x = p->g(x_star);
      const Point y_star = y_subproblem_solution(p->set, x_star, g_x, p->L);
      const bool x_side = k % 2 == 0;
      const SaddleProblem sp = x_side ? build_x_subproblem(st, p->mu, p->set)
                                      : build_y_subproblem(p->set, x_star, g_x, p->mu, p->L);
      const Point& warm = x_side ? st.x_k : st.y_k;
      Point z0(sp.dim());
      z0 << warm, warm;
      const SaddleResult res = solve_saddle(sp, Harmonic{}, kTiny, kInnerIterations, z0);
      worst = std::max(worst, (res.z.head(sp.dim_x()) - (x_side ? x_star : y_star)).norm());
      ++solved;
      st.x_k = x_star;
      absorb(st, *p, y_star, p->g(y_star), st.lambda_next);
    }
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-6 && t < 30.0,
          fmt("max distance %.3e over %d subproblems (tol 1e-6), %.1f s (limit 30 s)", worst, solved, t)};
}

// 2. Outer rate of the certificate and the iteration count to 1e-6.
Outcome outer_rate() {
  const auto t0 = std::chrono::steady_clock::now();
  const VIProblem p = affine_problem();
  const double gamma = p.gamma();

  VipOptions opt;
  opt.epsilon = kTiny;
  opt.max_outer = 200;
  opt.max_inner = 20000;
  double delta0 = 0.0;
  double worst_margin = -std::numeric_limits<double>::infinity();
  long worst_k = -1;
  opt.on_iteration = [&](const VipIteration& it) {
    if (it.k == 0) delta0 = it.delta;
    const double bound = delta0 * std::exp(-static_cast<double>(it.k) / (gamma + 1.0)) * 1.05 + it.slack / it.S;
    const double margin = it.delta_over_S - bound;
    if (margin > worst_margin) {
      worst_margin = margin;
      worst_k = it.k;
    }
  };
  solve_vip(p, opt);
  const bool rate_ok = worst_margin <= 0.0;

  VipOptions exact;
  exact.path = SubproblemPath::ClosedForm;
  exact.epsilon = 1e-6;
  exact.max_outer = 100000;
  const VipResult r = solve_vip(p, exact);
  const long bound = outer_iteration_bound(gamma, r.delta0, 1e-6) + 5;
  const bool iters_ok = r.converged && r.iterations <= bound;
  const double t = seconds_since(t0);
  return {rate_ok && iters_ok && t < 60.0,
          fmt("gamma %.4f, Delta0 %.4e; rate %s (worst excess %.3e at k=%ld); %ld iterations to 1e-6 vs "
              "bound %ld; %.1f s (limit 60 s)",
              gamma, delta0, rate_ok ? "holds" : "violated", worst_margin, worst_k, r.iterations, bound, t)};
}

// 3. Inner FW error decay: geometric under the adaptive rule, O(1/k) under
// the harmonic rule.
Outcome saddle_rates() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto q = fixture::interior_instance();
  const SaddleProblem sp = q.problem();
  const double sigma = fixture::border_distance(q.saddle_point());
  const SaddleConstants c = q.constants(sigma);
  Point z0 = Point::Zero(sp.dim());

  std::vector<double> h;
  SaddleOptions so;
  so.stop = [&](const SaddleIterate& it) {
    h.push_back(q.error(it.z));
    return false;
  };
  solve_saddle(sp, select_rule(c), kTiny, 3000, z0, so);
  // Ratios are meaningful only above the rounding floor of h.
  constexpr double kFloor = 1e-13;
  double worst_ratio = 0.0;
  long checked = 0;
  for (std::size_t k = 20; k + 6 < h.size() && h[k + 6] > kFloor; ++k) {
    worst_ratio = std::max(worst_ratio, h[k + 6] / h[k]);
    ++checked;
  }
  const double ratio_limit = (1.0 - c.rho) + 0.1;
  const bool adaptive_ok = c.adaptive_applicable && checked > 0 && worst_ratio <= ratio_limit;

  h.clear();
  solve_saddle(sp, Harmonic{}, kTiny, 10000, z0, so);
  double early = 0.0;
  double late = 0.0;
  bool finite = true;
  for (std::size_t k = 100; k <= 10000 && k < h.size(); ++k) {
    const double v = h[k] * static_cast<double>(k);
    finite = finite && std::isfinite(v);
    if (k <= 1000) early = std::max(early, v);
    if (k >= 5000) late = std::max(late, v);
  }
  const bool harmonic_ok = finite && h.size() == 10001 && late <= 2.0 * early;
  const double t = seconds_since(t0);
  return {adaptive_ok && harmonic_ok && t < 60.0,
          fmt("adaptive: nu %.3f rho %.3e, max h(k+6)/h(k) %.4f vs %.4f over %ld k; harmonic: max k*h(k) "
              "%.3e on [100,1000], %.3e on [5000,10000]; %.2f s",
              c.nu, c.rho, worst_ratio, ratio_limit, checked, early, late, t)};
}

// 4. Delta_k is non-increasing under exact inner solves.
Outcome monotone_delta() {
  const VIProblem affine = affine_problem();
  const auto tap = tap_problem();
  std::string detail;
  bool ok = true;
  for (const auto& [name, p] : {std::pair<const char*, const VIProblem*>{"affine", &affine}, {"tap", &tap.vi}}) {
    VipOptions opt;
    opt.path = SubproblemPath::ClosedForm;
    opt.epsilon = kTiny;
    opt.max_outer = 200;
    opt.retain_history = true;
    double prev = std::numeric_limits<double>::quiet_NaN();
    double worst = -std::numeric_limits<double>::infinity();
    long steps = 0;
    opt.on_iteration = [&](const VipIteration& it) {
      if (it.k > 0) {
        worst = std::max(worst, (it.delta - prev) / std::abs(prev));
        ++steps;
      }
      prev = it.delta;
    };
    solve_vip(*p, opt);
    const bool inst_ok = steps == 200 && worst <= 1e-9;
    ok = ok && inst_ok;
    detail += fmt("%s%s: %ld steps, max relative increase %.3e", detail.empty() ? "" : "; ", name, steps, worst);
  }
  return {ok, detail + " (tol 1e-9)"};
}

// 5. Simplex projection against brute force; LMO against vertex enumeration.
Outcome geometry_oracles() {
  CounterRng rng(5, 0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Index n = 1 + t % 4;
    const double mass = rng.uniform(0.2, 3.0);
    const Point p = oracle::uniform_point(rng, n, -2.0, 2.0);
    const Point fast = project(ScaledSimplex(n, mass), p);
    const Point brute = oracle::simplex_projection_by_search(p, mass, 1e-4);
    worst = std::max(worst, (fast - brute).norm());
  }
  const std::vector<FeasibleSet> sets = {
      Box::uniform(3, -1.0, 2.0), ScaledSimplex(4, 2.5),
      ProductSet({ScaledSimplex(2, 0.5), Box(Point::Constant(2, -0.5), Point::Constant(2, 1.5)),
                  ScaledSimplex(3, 1.0)})};
  long mismatches = 0;
  long trials = 0;
  for (const auto& set : sets) {
    const auto verts = oracle::vertices(set);
    for (int t = 0; t < 100; ++t) {
      const Point d = oracle::uniform_point(rng, dimension(set), -1.0, 1.0);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& v : verts) best = std::min(best, v.dot(d));
      if (lmo(set, d).dot(d) != best) ++mismatches;
      ++trials;
    }
  }
  return {worst <= 1e-6 && mismatches == 0,
          fmt("projection: max distance to brute force %.3e over 100 points (tol 1e-6); LMO: %ld/%ld exact", worst,
              trials - mismatches, trials)};
}

// 6. TAP equilibrium reached by FW-VIP, PGD and NAG.
Outcome tap_equilibrium() {
  const auto t0 = std::chrono::steady_clock::now();
  const json j = {{"problem", {{"tap", json::object()}}},
                  {"solvers", {"PGD", "NAG"}},
                  {"epsilon", 1e-8},
                  {"budgets", {{"max_outer", 100000}, {"max_inner", 100000}}},
                  {"metrics", {"wardrop"}}};
  const auto cfg = harness::parse_config(j);
  const auto bp = harness::build_problem(cfg);

  // Inner solves run the harmonic rule to a fixed budget; 5e5 steps leave
  // sub-1e-6 flow on unused paths, which the wardrop threshold needs.
  VipOptions opt = harness::detail::fwvip_options(cfg, json::object());
  opt.epsilon = 1e-6;
  opt.max_inner = 500000;
  double worst_identity = 0.0;
  opt.on_iteration = [&](const VipIteration& it) {
    const double expect = expected_weight_sum(bp.vi.gamma(), it.k);
    worst_identity = std::max(worst_identity, std::abs(it.S - expect) / expect);
  };
  const VipResult fw = solve_vip(bp.vi, opt);

  std::ostringstream sink;
  const auto base = harness::run_experiment(cfg, sink);
  std::vector<std::pair<std::string, Point>> finals = {{"FW-VIP", fw.y_tilde}};
  bool ok = fw.converged && base.all_converged() && worst_identity <= 1e-12;
  for (const auto& s : base.solvers) finals.emplace_back(s.solver, s.final_iterate);
  std::string detail;
  for (const auto& [name, x] : finals) {
    const double w = tap::wardrop_residual(*bp.tap, x);
    ok = ok && w <= 1e-4;
    detail += fmt("%s wardrop %.2e; ", name.c_str(), w);
  }
  double dist = 0.0;
  for (const auto& a : finals) {
    for (const auto& b : finals) dist = std::max(dist, (a.second - b.second).norm());
  }
  ok = ok && dist <= 1e-3;
  const double t = seconds_since(t0);
  ok = ok && t < 120.0;
  return {ok, detail + fmt("max pairwise distance %.2e; S_k identity error %.1e; FW-VIP %ld iterations; %.1f s "
                           "(limit 120 s)",
                           dist, worst_identity, fw.iterations, t)};
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  return out;
}

// 7. Oracle counters equal the per-step formulas, on every CSV row.
Outcome counter_exactness() {
  bool ok = true;
  long rows = 0;
  std::string detail;
  for (const json& problem : {json{{"affine", {{"dim", 20}, {"mu", 1.0}, {"skew_scale", 5.0}, {"seed", 7}}}},
                             json{{"tap", json::object()}}}) {
    const json j = {{"problem", problem},
                    {"solvers", {"FW-VIP", "PGD", "EG", "NAG", "PRGD", "GR", "AGR"}},
                    {"epsilon", 1e-5},
                    {"budgets", {{"max_outer", 100000}, {"max_inner", 100000}}},
                    {"metrics", {"natural_residual"}}};
    std::ostringstream csv;
    const auto res = harness::run_experiment(harness::parse_config(j), csv);
    std::istringstream in(csv.str());
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      const auto c = split(line);
      const long k = std::stol(c[1]);
      const long lmo_calls = std::stol(c[2]);
      const long proj = std::stol(c[3]);
      const long g = std::stol(c[4]);
      ++rows;
      if (c[0] == harness::kFwVipName) {
        ok = ok && proj == 0 && g == 1 + 2 * k;
      } else {
        const auto f = per_step_counts(*parse_baseline(c[0]));
        ok = ok && lmo_calls == 0 && proj == k * f.proj && g == k * f.g_evals + f.initial_g_evals;
      }
    }
    for (const auto& s : res.solvers) {
      if (s.solver == harness::kFwVipName) {
        // Two inner solves per outer step; each gap evaluation costs one LMO per block.
        ok = ok && s.counters.lmo == 2 * (s.inner_iterations + 2 * s.iterations) && s.counters.proj == 0;
      }
    }
    detail += fmt("%s%s ok", detail.empty() ? "" : ", ", problem.begin().key().c_str());
  }
  return {ok, fmt("%ld CSV rows checked over 7 solvers (", rows) + detail + ")"};
}

// 8. Early stopping never costs inner iterations and keeps the accuracy.
Outcome early_stop() {
  const VIProblem p = affine_problem();
  VipOptions opt;
  opt.epsilon = 1e-6;
  opt.max_outer = 100000;
  opt.max_inner = 100000;
  const VipResult plain = solve_vip(p, opt);
  opt.early_stop = true;
  const VipResult early = solve_vip(p, opt);
  const bool ok = early.inner_iterations <= plain.inner_iterations &&
                  early.delta_over_S <= 10.0 * plain.delta_over_S;
  return {ok, fmt("inner iterations %ld with early stop vs %ld without; certificate %.3e vs %.3e (limit 10x)",
                  early.inner_iterations, plain.inner_iterations, early.delta_over_S, plain.delta_over_S)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria = {
      {1, {"inner FW matches closed-form subproblem solutions", inner_oracle_equivalence}},
      {2, {"outer certificate rate and iteration bound", outer_rate}},
      {3, {"inner FW error rates (adaptive, harmonic)", saddle_rates}},
      {4, {"certificate monotone under exact inner solves", monotone_delta}},
      {5, {"geometry oracles against brute force", geometry_oracles}},
      {6, {"TAP equilibrium across FW-VIP, PGD, NAG", tap_equilibrium}},
      {7, {"oracle counter exactness", counter_exactness}},
      {8, {"inner early stopping", early_stop}},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const int n = std::atoi(argv[i]);
    if (!criteria.count(n)) {
      std::fprintf(stderr, "unknown criterion '%s'\n", argv[i]);
      return 1;
    }
    selected.push_back(n);
  }
  if (selected.empty()) {
    for (const auto& [n, _] : criteria) selected.push_back(n);
  }
  bool all = true;
  for (int n : selected) {
    const auto& [name, fn] = criteria.at(n);
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.passed;
    std::printf("%s [%d] %s: %s\n", o.passed ? "PASS" : "FAIL", n, name, o.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
