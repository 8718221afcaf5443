#pragma once

// Fast in-process property checks, runnable from the command line.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "fwvip/baselines.hpp"
#include "fwvip/geometry.hpp"
#include "fwvip/operators.hpp"
#include "fwvip/rng.hpp"
#include "fwvip/saddle_fw.hpp"
#include "fwvip/tap.hpp"
#include "fwvip/vip_fw.hpp"

namespace fwvip::selftest {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline CheckResult lmo_beats_samples() {
  CheckResult r{"lmo is no worse than 1000 sampled points", true, ""};
  const std::vector<FeasibleSet> sets = {
      Box::uniform(4, -1.0, 2.0), ScaledSimplex(5, 3.0),
      ProductSet({ScaledSimplex(2, 0.5), Box::uniform(3, 0.0, 1.0)})};
  CounterRng rng(11, 0);
  for (const auto& set : sets) {
    const Index n = dimension(set);
    Point d(n);
    for (Index i = 0; i < n; ++i) d[i] = rng.uniform(-1.0, 1.0);
    const double best = lmo(set, d).dot(d);
    for (int s = 0; s < 1000; ++s) {
      if (sample(set, rng).dot(d) < best - 1e-12 * (1.0 + std::abs(best))) r.passed = false;
    }
  }
  return r;
}

inline CheckResult projection_is_idempotent_and_optimal() {
  CheckResult r{"projection is idempotent and satisfies the obtuse-angle condition", true, ""};
  const std::vector<FeasibleSet> sets = {Box::uniform(3, -1.0, 1.0), ScaledSimplex(4, 2.0),
                                         ProductSet({ScaledSimplex(2, 0.3), ScaledSimplex(3, 1.0)})};
  CounterRng rng(12, 0);
  for (const auto& set : sets) {
    const Index n = dimension(set);
    for (int t = 0; t < 50; ++t) {
      Point p(n);
      for (Index i = 0; i < n; ++i) p[i] = rng.uniform(-3.0, 3.0);
      const Point q = project(set, p);
      if (!contains(set, q) || (project(set, q) - q).norm() > 1e-12) r.passed = false;
      for (int s = 0; s < 20; ++s) {
        const Point z = sample(set, rng);
        if ((p - q).dot(z - q) > 1e-10) r.passed = false;
      }
    }
  }
  return r;
}

inline CheckResult tap_structure() {
  CheckResult r{"TAP instance has 40 links, 10 paths, one entrance and exit per path", true, ""};
  const auto inst = tap::build_instance();
  if (inst.num_links() != 40 || inst.num_paths() != 10) r.passed = false;
  for (Index p = 0; p < inst.num_paths(); ++p) {
    int entrances = 0;
    int exits = 0;
    for (Index l = 0; l < inst.num_links(); ++l) {
      if (inst.incidence()(l, p) == 0.0) continue;
      const auto kind = inst.links()[static_cast<std::size_t>(l)].kind;
      entrances += kind == tap::LinkKind::EntranceRamp;
      exits += kind == tap::LinkKind::ExitRamp;
    }
    if (entrances != 1 || exits != 1) r.passed = false;
  }
  return r;
}

inline CheckResult inner_solver_matches_projection() {
  CheckResult r{"inner FW solve of the y-subproblem matches its projection closed form", true, ""};
  const AffineInstance inst = make_affine_instance(5, 1.0, 2.0, 3);
  const VIProblem p{inst.op.field(), inst.box, inst.mu, inst.L};
  CounterRng rng(13, 0);
  const Point x = sample(p.set, rng);
  const Point gx = p.g(x);
  const SaddleProblem sp = build_y_subproblem(p.set, x, gx, p.mu, p.L);
  Point z0(sp.dim());
  z0 << x, x;
  const SaddleResult res = solve_saddle(sp, Harmonic{}, 1e-9, 2000000, z0);
  const double err = (res.z.head(sp.dim_x()) - y_subproblem_solution(p.set, x, gx, p.L)).norm();
  r.passed = err <= 1e-4;
  r.detail = "distance " + std::to_string(err);
  return r;
}

inline CheckResult baseline_counts() {
  CheckResult r{"baseline oracle counters equal per-step formulas", true, ""};
  const AffineInstance inst = make_affine_instance(4, 1.0, 1.0, 5);
  const VIProblem p{inst.op.field(), inst.box, inst.mu, inst.L};
  for (auto m : {BaselineMethod::PGD, BaselineMethod::Extragradient, BaselineMethod::NAG,
                 BaselineMethod::ProjectedReflected, BaselineMethod::GoldenRatio,
                 BaselineMethod::AdaptiveGoldenRatio}) {
    BaselineRunner run(p, make_baseline_config(m, p.mu, p.L), center(p.set));
    for (int k = 0; k < 7; ++k) run.step();
    const auto c = per_step_counts(m);
    if (run.counters().proj != 7 * c.proj || run.counters().g_evals != 7 * c.g_evals + c.initial_g_evals) {
      r.passed = false;
    }
  }
  return r;
}

inline CheckResult weight_identity() {
  CheckResult r{"FW-VIP weight sum follows its closed form", true, ""};
  const AffineInstance inst = make_affine_instance(3, 1.0, 1.0, 9);
  const VIProblem p{inst.op.field(), inst.box, inst.mu, inst.L};
  VipOptions opt;
  opt.path = SubproblemPath::ClosedForm;
  opt.epsilon = 1e-300;
  opt.max_outer = 30;
  opt.on_iteration = [&](const VipIteration& it) {
    const double expect = expected_weight_sum(p.gamma(), it.k);
    if (std::abs(it.S - expect) > 1e-12 * expect) r.passed = false;
  };
  solve_vip(p, opt);
  return r;
}

}  // namespace detail

inline std::vector<CheckResult> run_all() {
  return {detail::lmo_beats_samples(), detail::projection_is_idempotent_and_optimal(),
          detail::tap_structure(), detail::inner_solver_matches_projection(),
          detail::baseline_counts(), detail::weight_identity()};
}

}  // namespace fwvip::selftest
