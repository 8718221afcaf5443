#pragma once

// Projection-free accelerated method for strongly monotone variational
// inequalities: find x* in V with <g(x*), x - x*> >= 0 for all x in V.
//
// The outer loop is a dual-extrapolation scheme with weights
// lambda_0 = 1, lambda_{k+1} = S_k / (2 gamma), S_k = sum_i lambda_i, whose
// two per-iteration argmax steps are recast as strongly convex-concave saddle
// problems and handed to the Frank-Wolfe saddle oracle. The returned point is
// the weighted average y~_k = (1/S_k) sum_i lambda_i y_i, and
// Delta_k / S_k upper-bounds the gap function at y~_k.

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fwvip/counters.hpp"
#include "fwvip/geometry.hpp"
#include "fwvip/operators.hpp"
#include "fwvip/saddle_fw.hpp"

namespace fwvip {

struct VIProblem {
  VectorField g;
  FeasibleSet set;
  double mu = 0.0;
  double L = 0.0;

  double gamma() const { return L / mu; }

  void validate() const {
    if (!(mu > 0.0) || !(L > 0.0) || !std::isfinite(mu) || !std::isfinite(L)) {
      throw std::invalid_argument("VIProblem: mu and L must be positive and finite");
    }
    if (L < mu) throw std::invalid_argument("VIProblem: L must be >= mu (gamma >= 1)");
    detail::require_dim(dimension(set), g.dim, "VIProblem");
  }
};

// One absorbed point of the weighted sum; kept only on request.
struct WeightedPoint {
  double lambda;
  Point y;
  Point gy;
};

// Running state after absorbing y_0..y_k. Psi_k(x) = sum_i lambda_i
// [<g(y_i), y_i - x> - mu/2 |x - y_i|^2] is stored as
// offset + <c, x> - (mu S / 2)|x|^2.
struct OuterState {
  long k = 0;
  double S = 1.0;
  double lambda_next = 0.0;
  Point c;
  Point y_avg;
  Point x_k;
  Point y_k;
  double offset = 0.0;
  std::vector<WeightedPoint> history;
};

inline OuterState initial_state(const VIProblem& p, const Point& y0, const Point& g_y0,
                                bool retain_history = false) {
  OuterState st;
  st.k = 0;
  st.S = 1.0;
  st.lambda_next = st.S / (2.0 * p.gamma());
  st.c = p.mu * y0 - g_y0;
  st.y_avg = y0;
  st.x_k = y0;
  st.y_k = y0;
  st.offset = g_y0.dot(y0) - 0.5 * p.mu * y0.squaredNorm();
  if (retain_history) st.history.push_back({1.0, y0, g_y0});
  return st;
}

// Adds lambda * psi_{y} to the running sums and advances k.
inline void absorb(OuterState& st, const VIProblem& p, const Point& y, const Point& gy,
                   double lambda) {
  const double s_new = st.S + lambda;
  st.c += lambda * (p.mu * y - gy);
  st.y_avg += (lambda / s_new) * (y - st.y_avg);
  st.offset += lambda * (gy.dot(y) - 0.5 * p.mu * y.squaredNorm());
  st.S = s_new;
  st.k += 1;
  st.y_k = y;
  st.lambda_next = st.S / (2.0 * p.gamma());
  if (!st.history.empty()) st.history.push_back({lambda, y, gy});
}

// Psi_k(x). With retained history the sum is evaluated term by term, which
// avoids cancelling O(S) magnitudes late in a run.
inline double psi_value(const OuterState& st, double mu, const Point& x) {
  if (!st.history.empty()) {
    double total = 0.0;
    for (const auto& h : st.history) {
      total += h.lambda * (h.gy.dot(h.y - x) - 0.5 * mu * (x - h.y).squaredNorm());
    }
    return total;
  }
  return st.offset + st.c.dot(x) - 0.5 * mu * st.S * x.squaredNorm();
}

// Exact (S_k) recurrence value: S_k = (1 + 1/(2 gamma))^k.
inline double expected_weight_sum(double gamma, long k) {
  return std::pow(1.0 + 1.0 / (2.0 * gamma), static_cast<double>(k));
}

enum class CertificateMode { ProjectionDiagnostic, FwGapBound };

struct GapCertificate {
  double delta = 0.0;
  double delta_over_S = 0.0;
  CertificateMode method = CertificateMode::ProjectionDiagnostic;
  Point maximizer;
  // Final FW gap added to the bound in FwGapBound mode; 0 otherwise.
  double fw_gap = 0.0;
};

inline constexpr long kDefaultFwCertificateIterations = 2000;

// Upper bound on f(y~_k) via Delta_k / S_k. Psi_k is an isotropic concave
// quadratic, so its maximizer over V is proj(c / (mu S)); ProjectionDiagnostic
// evaluates it exactly with one projection. FwGapBound instead runs
// line-search Frank-Wolfe on the same quadratic and adds the final FW gap.
// Oracle calls are charged to counters.diag.
inline GapCertificate gap_upper_bound(const OuterState& st, const VIProblem& p,
                                      CertificateMode mode, OracleCounters& counters,
                                      long fw_max_iter = kDefaultFwCertificateIterations) {
  const double a = p.mu * st.S;
  const Point center = st.c / a;
  GapCertificate cert;
  cert.method = mode;
  if (mode == CertificateMode::ProjectionDiagnostic) {
    cert.maximizer = project(p.set, center);
    counters.diag += 1;
    cert.delta = psi_value(st, p.mu, cert.maximizer);
  } else {
    // Minimize (a/2)|x - center|^2 over V; Delta <= Psi(x) + gap by concavity.
    Point x = st.x_k;
    Point grad(x.size());
    Point s(x.size());
    double gap = 0.0;
    for (long it = 0;; ++it) {
      grad = a * (x - center);
      lmo_into(p.set, grad, s);
      counters.diag += 1;
      gap = (x - s).dot(grad);
      if (gap <= 1e-14 * (1.0 + std::abs(psi_value(st, p.mu, x))) || it == fw_max_iter) break;
      const Point d = s - x;
      const double dd = d.squaredNorm();
      if (dd == 0.0) break;
      const double step = std::clamp((center - x).dot(d) / dd, 0.0, 1.0);
      x += step * d;
    }
    cert.maximizer = x;
    cert.fw_gap = std::max(gap, 0.0);
    cert.delta = psi_value(st, p.mu, x) + cert.fw_gap;
  }
  cert.delta_over_S = cert.delta / st.S;
  return cert;
}

namespace detail {

// Largest |eigenvalue| of the symmetric 2x2 block pattern [[a, b], [b, d]].
inline double sym2_norm(double a, double b, double d) {
  const double tr = a + d;
  const double disc = std::sqrt((a - d) * (a - d) + 4.0 * b * b);
  return std::max(std::abs(0.5 * (tr + disc)), std::abs(0.5 * (tr - disc)));
}

// <a, x - u> - (q/4)|x - u|^2 without temporaries.
inline double linear_minus_quadratic(ConstPointRef a, ConstPointRef x, ConstPointRef u, double q) {
  double lin = 0.0;
  double sq = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    const double d = x[i] - u[i];
    lin += a[i] * d;
    sq += d * d;
  }
  return lin - 0.25 * q * sq;
}

}  // namespace detail

// F1(u, x) = <-mu S u + c, x - u> - (mu S / 4)|x - u|^2 over V x V; u is the
// minimizing block. Its saddle point is u = x = proj(c / (mu S)).
inline SaddleProblem build_x_subproblem(const OuterState& st, double mu, const FeasibleSet& set) {
  if (!(st.S > 0.0)) throw std::invalid_argument("build_x_subproblem: S must be > 0");
  const double a = mu * st.S;
  SaddleProblem sp(set, set);
  sp.grad_x = [a, c = st.c](ConstPointRef u, ConstPointRef x, PointRef out) {
    out = a * u - c - (0.5 * a) * (x - u);
  };
  sp.grad_y = [a, c = st.c](ConstPointRef u, ConstPointRef x, PointRef out) {
    out = c - a * u - (0.5 * a) * (x - u);
  };
  sp.value = [a, c = st.c](ConstPointRef u, ConstPointRef x) {
    double lin = 0.0;
    double sq = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
      const double d = x[i] - u[i];
      lin += (c[i] - a * u[i]) * d;
      sq += d * d;
    }
    return lin - 0.25 * a * sq;
  };
  sp.mu_x = 1.5 * a;
  sp.mu_y = 0.5 * a;
  sp.L_xy = 0.5 * a;
  sp.L_yx = 0.5 * a;
  sp.L0 = detail::sym2_norm(1.5 * a, -0.5 * a, -0.5 * a);
  sp.isotropic = IsotropicGradient{1.5 * a, -0.5 * a, -0.5 * a, -0.5 * a, -st.c, st.c};
  return sp;
}

// F2(v, x) = <-g(x_k) - beta (v - x_k), x - v> - (mu/4)|x - v|^2 over V x V.
// Its saddle point is v = x = proj(x_k - g(x_k) / beta).
inline SaddleProblem build_y_subproblem(const FeasibleSet& set, const Point& x_k, const Point& g_xk,
                                        double mu, double beta) {
  if (!(mu > 0.0) || !(beta >= mu)) {
    throw std::invalid_argument("build_y_subproblem: need beta >= mu > 0");
  }
  SaddleProblem sp(set, set);
  const double cross = beta - 0.5 * mu;
  sp.grad_x = [x_k, g_xk, beta, cross](ConstPointRef v, ConstPointRef x, PointRef out) {
    out = g_xk + beta * (v - x_k) - cross * (x - v);
  };
  sp.grad_y = [x_k, g_xk, beta, mu](ConstPointRef v, ConstPointRef x, PointRef out) {
    out = -g_xk - beta * (v - x_k) - (0.5 * mu) * (x - v);
  };
  sp.value = [x_k, g_xk, beta, mu](ConstPointRef v, ConstPointRef x) {
    double lin = 0.0;
    double sq = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
      const double d = x[i] - v[i];
      lin += (-g_xk[i] - beta * (v[i] - x_k[i])) * d;
      sq += d * d;
    }
    return lin - 0.25 * mu * sq;
  };
  sp.mu_x = 2.0 * beta - 0.5 * mu;
  sp.mu_y = 0.5 * mu;
  sp.L_xy = cross;
  sp.L_yx = cross;
  sp.L0 = detail::sym2_norm(2.0 * beta - 0.5 * mu, -cross, -0.5 * mu);
  const Point shift = g_xk - beta * x_k;
  sp.isotropic = IsotropicGradient{2.0 * beta - 0.5 * mu, -cross, -cross, -0.5 * mu, shift, -shift};
  return sp;
}

inline Point x_subproblem_solution(const OuterState& st, double mu, const FeasibleSet& set) {
  return project(set, st.c / (mu * st.S));
}

inline Point y_subproblem_solution(const FeasibleSet& set, const Point& x_k, const Point& g_xk,
                                   double beta) {
  return project(set, x_k - g_xk / beta);
}

// Certified upper bound on min_u max_x F(u, x) at the current inner iterate:
// F(u, x) + (FW gap of the maximizing block), by concavity of F(u, .).
inline double saddle_value_bound(const SaddleProblem& sp, ConstPointRef z, double max_side_gap) {
  if (!sp.value) throw std::invalid_argument("saddle_value_bound: problem has no value callback");
  return sp.value(z.head(sp.dim_x()), z.tail(sp.dim_y())) + max_side_gap;
}

inline constexpr double kEarlyStopThreshold = -1e-12;

// Inner termination once the subproblem value is certified negative.
inline bool early_stop_rule(const SaddleProblem& sp, const SaddleIterate& it) {
  return saddle_value_bound(sp, it.z, it.fw_gap_y) < kEarlyStopThreshold;
}

inline StopCallback early_stop_callback(const SaddleProblem& sp) {
  return [&sp](const SaddleIterate& it) { return early_stop_rule(sp, it); };
}

enum class SubproblemPath { ProjectionFree, ClosedForm };

struct VipIteration {
  long k;
  double S;
  double delta;
  double delta_over_S;
  // Accumulated inner inexactness: sum_i (tau_x,i + lambda_{i+1} tau_y,i).
  double slack;
  long inner_iterations;
  bool degraded;
  const Point& x_k;
  const Point& y_k;
  const Point& y_tilde;
  const OracleCounters& counters;
  long wall_ns;
};

struct VipOptions {
  double epsilon = 1e-6;
  // Fixed inner FW tolerance; when unset, epsilon / (10 (k+1)^2).
  std::optional<double> inner_epsilon;
  long max_outer = 1000;
  long max_inner = 100000;
  SubproblemPath path = SubproblemPath::ProjectionFree;
  CertificateMode certificate = CertificateMode::ProjectionDiagnostic;
  bool early_stop = false;
  // Border distance of the subproblem saddles; enables the adaptive inner
  // stepsize when the resulting constants admit it.
  std::optional<double> border_distance_hint;
  std::optional<Point> y0;
  bool retain_history = false;
  std::function<void(const VipIteration&)> on_iteration;
};

struct VipResult {
  Point y_tilde;
  bool converged = false;
  long iterations = 0;
  double delta0 = 0.0;
  double delta = 0.0;
  double delta_over_S = 0.0;
  double slack = 0.0;
  double S = 1.0;
  long inner_iterations = 0;
  long degraded_iterations = 0;
  OracleCounters counters;
  long wall_ns = 0;
};

namespace detail {

inline StepsizeRule inner_rule(const SaddleProblem& sp, const std::optional<double>& hint) {
  if (!hint) return Harmonic{};
  const double d = diameter(sp.set_x);
  const auto c = saddle_rate_constants(d, d, sp.L0, sp.L_xy, sp.L_yx, sp.mu_x, sp.mu_y, *hint, *hint);
  return select_rule(c);
}

struct InnerOutcome {
  Point solution;
  double tau = 0.0;
  long iterations = 0;
  bool degraded = false;
};

inline InnerOutcome solve_inner(const SaddleProblem& sp, const Point& warm, double eps,
                                const VipOptions& opt, OracleCounters& counters) {
  Point z0(sp.dim());
  z0.head(sp.dim_x()) = warm;
  z0.tail(sp.dim_y()) = warm;
  SaddleOptions so;
  if (opt.early_stop) so.stop = early_stop_callback(sp);
  const SaddleResult res = solve_saddle(sp, inner_rule(sp, opt.border_distance_hint), eps,
                                        opt.max_inner, z0, so);
  counters.lmo += res.lmo_calls;
  InnerOutcome out;
  out.solution = res.z.head(sp.dim_x());
  out.tau = std::max(0.0, saddle_value_bound(sp, res.z, res.fw_gap_y));
  out.iterations = res.iterations;
  out.degraded = !res.converged && !res.stopped_early;
  return out;
}

}  // namespace detail

inline VipResult solve_vip(const VIProblem& p, const VipOptions& opt = {}) {
  p.validate();
  if (!(opt.epsilon > 0.0)) throw std::invalid_argument("solve_vip: epsilon must be > 0");
  using Clock = std::chrono::steady_clock;

  VipResult result;
  OracleCounters& counters = result.counters;
  long wall_ns = 0;
  auto timed = [&wall_ns](auto&& fn) {
    const auto t0 = Clock::now();
    fn();
    wall_ns += std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count();
  };

  Point y0 = opt.y0 ? *opt.y0 : center(p.set);
  if (!contains(p.set, y0)) throw std::invalid_argument("solve_vip: starting point is infeasible");
  OuterState st;
  timed([&] {
    const Point g0 = p.g(y0);
    counters.g_evals += 1;
    st = initial_state(p, y0, g0, opt.retain_history);
  });

  GapCertificate cert = gap_upper_bound(st, p, opt.certificate, counters);
  result.delta0 = cert.delta;
  double slack = 0.0;
  auto emit = [&](long inner, bool degraded) {
    if (opt.on_iteration) {
      opt.on_iteration(VipIteration{st.k, st.S, cert.delta, cert.delta_over_S, slack, inner, degraded,
                                    st.x_k, st.y_k, st.y_avg, counters, wall_ns});
    }
  };
  emit(0, false);
  result.converged = cert.delta_over_S <= opt.epsilon;

  const double beta = p.L;
  for (long k = 0; k < opt.max_outer && !result.converged; ++k) {
    const double inner_eps =
        opt.inner_epsilon ? *opt.inner_epsilon
                          : opt.epsilon / (10.0 * static_cast<double>(k + 1) * static_cast<double>(k + 1));
    long inner_iters = 0;
    bool degraded = false;
    double tau_x = 0.0;
    double tau_y = 0.0;
    timed([&] {
      Point x_k;
      if (opt.path == SubproblemPath::ClosedForm) {
        x_k = x_subproblem_solution(st, p.mu, p.set);
        counters.proj += 1;
      } else {
        const SaddleProblem sp = build_x_subproblem(st, p.mu, p.set);
        auto out = detail::solve_inner(sp, st.x_k, inner_eps, opt, counters);
        x_k = std::move(out.solution);
        tau_x = out.tau;
        inner_iters += out.iterations;
        degraded = degraded || out.degraded;
      }
      const Point g_xk = p.g(x_k);
      counters.g_evals += 1;

      Point y_next;
      if (opt.path == SubproblemPath::ClosedForm) {
        y_next = y_subproblem_solution(p.set, x_k, g_xk, beta);
        counters.proj += 1;
      } else {
        const SaddleProblem sp = build_y_subproblem(p.set, x_k, g_xk, p.mu, beta);
        auto out = detail::solve_inner(sp, st.y_k, inner_eps, opt, counters);
        y_next = std::move(out.solution);
        tau_y = out.tau;
        inner_iters += out.iterations;
        degraded = degraded || out.degraded;
      }
      const Point g_y = p.g(y_next);
      counters.g_evals += 1;

      const double lambda = st.lambda_next;
      st.x_k = std::move(x_k);
      absorb(st, p, y_next, g_y, lambda);
      slack += tau_x + lambda * tau_y;
    });
    result.inner_iterations += inner_iters;
    if (degraded) ++result.degraded_iterations;

    cert = gap_upper_bound(st, p, opt.certificate, counters);
    emit(inner_iters, degraded);
    result.converged = cert.delta_over_S <= opt.epsilon;
  }

  result.y_tilde = st.y_avg;
  result.iterations = st.k;
  result.delta = cert.delta;
  result.delta_over_S = cert.delta_over_S;
  result.slack = slack;
  result.S = st.S;
  result.wall_ns = wall_ns;
  return result;
}

// Outer iteration budget for a certificate below epsilon given Delta_0:
// ceil((gamma + 1) log(gamma^2 Delta_0 / epsilon)).
inline long outer_iteration_bound(double gamma, double delta0, double epsilon) {
  return static_cast<long>(std::ceil((gamma + 1.0) * std::log(gamma * gamma * delta0 / epsilon)));
}

}  // namespace fwvip
