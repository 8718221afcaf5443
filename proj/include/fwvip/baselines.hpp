#pragma once

// Projected reference methods for strongly monotone VIs: projected gradient,
// extragradient, Nesterov-type dual extrapolation, projected reflected
// gradient, and the (adaptive) golden ratio algorithm.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "fwvip/counters.hpp"
#include "fwvip/geometry.hpp"
#include "fwvip/vip_fw.hpp"

namespace fwvip {

enum class BaselineMethod {
  PGD,
  Extragradient,
  NAG,
  ProjectedReflected,
  GoldenRatio,
  AdaptiveGoldenRatio,
};

inline std::string_view to_string(BaselineMethod m) {
  switch (m) {
    case BaselineMethod::PGD: return "PGD";
    case BaselineMethod::Extragradient: return "EG";
    case BaselineMethod::NAG: return "NAG";
    case BaselineMethod::ProjectedReflected: return "PRGD";
    case BaselineMethod::GoldenRatio: return "GR";
    case BaselineMethod::AdaptiveGoldenRatio: return "AGR";
  }
  return "?";
}

inline std::optional<BaselineMethod> parse_baseline(std::string_view name) {
  for (auto m : {BaselineMethod::PGD, BaselineMethod::Extragradient, BaselineMethod::NAG,
                 BaselineMethod::ProjectedReflected, BaselineMethod::GoldenRatio,
                 BaselineMethod::AdaptiveGoldenRatio}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

inline const double kGoldenZeta = 0.5 * (std::sqrt(5.0) - 1.0);

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::PGD;
  // Stepsize; the initial stepsize for the adaptive golden ratio method.
  // Unused by NAG, whose weights are fixed by mu and L.
  double alpha = 0.0;
  double zeta = 0.0;
};

// Builds a config, filling defaults and checking the stepsize against the
// method's convergence range for the given mu and L.
inline BaselineConfig make_baseline_config(BaselineMethod method, double mu, double L,
                                           std::optional<double> alpha = std::nullopt,
                                           std::optional<double> zeta = std::nullopt) {
  if (!(mu > 0.0) || !(L >= mu)) throw std::invalid_argument("baseline: need L >= mu > 0");
  BaselineConfig cfg;
  cfg.method = method;
  auto check = [&](double hi, const char* range) {
    if (!(cfg.alpha > 0.0) || !(cfg.alpha < hi)) {
      throw std::invalid_argument(std::string(to_string(method)) + ": stepsize " +
                                  std::to_string(cfg.alpha) + " outside " + range);
    }
  };
  const bool golden = method == BaselineMethod::GoldenRatio ||
                      method == BaselineMethod::AdaptiveGoldenRatio;
  if (golden) {
    cfg.zeta = zeta.value_or(kGoldenZeta);
    if (!(cfg.zeta > 0.0) || cfg.zeta > kGoldenZeta + 1e-15) {
      throw std::invalid_argument(std::string(to_string(method)) + ": zeta outside (0, (sqrt5-1)/2]");
    }
  }
  switch (method) {
    case BaselineMethod::PGD:
      cfg.alpha = alpha.value_or(mu / (L * L));
      check(2.0 * mu / (L * L), "(0, 2mu/L^2)");
      break;
    case BaselineMethod::Extragradient:
      cfg.alpha = alpha.value_or(0.5 / L);
      check(1.0 / L, "(0, 1/L)");
      break;
    case BaselineMethod::ProjectedReflected:
      cfg.alpha = alpha.value_or(0.4 * (std::sqrt(2.0) - 1.0) / L);
      check((std::sqrt(2.0) - 1.0) / L, "(0, (sqrt2-1)/L)");
      break;
    case BaselineMethod::GoldenRatio:
      cfg.alpha = alpha.value_or(0.4 / (cfg.zeta * L));
      check(1.0 / (2.0 * cfg.zeta * L), "(0, 1/(2 zeta L))");
      break;
    case BaselineMethod::AdaptiveGoldenRatio:
      cfg.alpha = alpha.value_or(0.4 / (cfg.zeta * L));
      check(std::numeric_limits<double>::infinity(), "(0, inf)");
      break;
    case BaselineMethod::NAG:
      cfg.alpha = 0.0;
      break;
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Single steps. Each charges exactly its own oracle calls to `counters`.

inline Point pgd_step(const VIProblem& p, double alpha, const Point& x, OracleCounters& counters) {
  const Point gx = p.g(x);
  counters.g_evals += 1;
  counters.proj += 1;
  return project(p.set, x - alpha * gx);
}

inline Point extragradient_step(const VIProblem& p, double alpha, const Point& x,
                                OracleCounters& counters) {
  const Point y = project(p.set, x - alpha * p.g(x));
  const Point x_next = project(p.set, x - alpha * p.g(y));
  counters.g_evals += 2;
  counters.proj += 2;
  return x_next;
}

inline Point projected_reflected_step(const VIProblem& p, double alpha, const Point& x,
                                      const Point& x_prev, OracleCounters& counters) {
  const Point reflected = 2.0 * x - x_prev;
  counters.g_evals += 1;
  counters.proj += 1;
  return project(p.set, x - alpha * p.g(reflected));
}

struct GoldenRatioStep {
  Point x;
  Point y;
};

// y' = (1 - zeta) x + zeta y_prev;  x' = proj(y' - alpha g(x)).
inline GoldenRatioStep golden_ratio_step(const VIProblem& p, double alpha, double zeta,
                                         const Point& x, const Point& gx, const Point& y_prev,
                                         OracleCounters& counters) {
  GoldenRatioStep out;
  out.y = (1.0 - zeta) * x + zeta * y_prev;
  out.x = project(p.set, out.y - alpha * gx);
  counters.proj += 1;
  return out;
}

// alpha_k = min{(zeta + zeta^2) alpha_{k-1},
//               |x_k - x_{k-1}|^2 / (4 zeta^2 alpha_{k-2} |g(x_k) - g(x_{k-1})|^2)};
// the second term counts as +inf when g(x_k) == g(x_{k-1}).
inline double adaptive_golden_stepsize(double zeta, double alpha_prev, double alpha_prev2,
                                       const Point& x, const Point& x_prev, const Point& gx,
                                       const Point& g_prev) {
  const double growth = (zeta + zeta * zeta) * alpha_prev;
  const double dg2 = (gx - g_prev).squaredNorm();
  if (dg2 == 0.0) return growth;
  const double curvature = (x - x_prev).squaredNorm() / (4.0 * zeta * zeta * alpha_prev2 * dg2);
  return std::min(growth, curvature);
}

// Natural residual |x - proj(x - g(x)/L)|. Its projection is a diagnostic.
inline double natural_residual(const VIProblem& p, const Point& x, const Point& gx,
                               OracleCounters& counters) {
  counters.diag += 1;
  return (x - project(p.set, x - gx / p.L)).norm();
}

// ---------------------------------------------------------------------------

// Iterates one baseline method from x0. `iterate()` is the point the method
// reports: the current x for the projected methods and the weighted average
// of the y_i for NAG.
class BaselineRunner {
 public:
  BaselineRunner(const VIProblem& p, BaselineConfig cfg, Point x0)
      : p_(&p), cfg_(cfg), x_(std::move(x0)) {
    p.validate();
    if (!contains(p.set, x_)) throw std::invalid_argument("baseline: starting point is infeasible");
    x_prev_ = x_;
    y_prev_ = x_;
    alpha_prev_ = cfg_.alpha;
    alpha_prev2_ = cfg_.alpha;
    if (cfg_.method == BaselineMethod::NAG) {
      // alpha_0 = 1 on y_0 = x0.
      g_prev_ = p.g(x_);
      counters_.g_evals += 1;
      weight_sum_ = 1.0;
      dual_ = p.mu * x_ - g_prev_;
      y_avg_ = x_;
      next_weight_ = p.mu / p.L * weight_sum_;
    }
  }

  void step() {
    const VIProblem& p = *p_;
    switch (cfg_.method) {
      case BaselineMethod::PGD:
        x_ = pgd_step(p, cfg_.alpha, x_, counters_);
        break;
      case BaselineMethod::Extragradient:
        x_ = extragradient_step(p, cfg_.alpha, x_, counters_);
        break;
      case BaselineMethod::ProjectedReflected: {
        Point next = projected_reflected_step(p, cfg_.alpha, x_, x_prev_, counters_);
        x_prev_ = std::move(x_);
        x_ = std::move(next);
        break;
      }
      case BaselineMethod::GoldenRatio:
      case BaselineMethod::AdaptiveGoldenRatio: {
        const Point gx = p.g(x_);
        counters_.g_evals += 1;
        double alpha = cfg_.alpha;
        if (cfg_.method == BaselineMethod::AdaptiveGoldenRatio) {
          if (iterations_ > 0) {
            alpha = adaptive_golden_stepsize(cfg_.zeta, alpha_prev_, alpha_prev2_, x_, x_prev_, gx,
                                             g_prev_);
          }
          alpha_prev2_ = alpha_prev_;
          alpha_prev_ = alpha;
        }
        auto next = golden_ratio_step(p, alpha, cfg_.zeta, x_, gx, y_prev_, counters_);
        x_prev_ = std::move(x_);
        g_prev_ = gx;
        x_ = std::move(next.x);
        y_prev_ = std::move(next.y);
        last_alpha_ = alpha;
        break;
      }
      case BaselineMethod::NAG:
        nag_step();
        break;
    }
    ++iterations_;
  }

  const Point& iterate() const { return cfg_.method == BaselineMethod::NAG ? y_avg_ : x_; }
  const Point& current() const { return x_; }
  const OracleCounters& counters() const { return counters_; }
  OracleCounters& counters() { return counters_; }
  long iterations() const { return iterations_; }
  const BaselineConfig& config() const { return cfg_; }
  double weight_sum() const { return weight_sum_; }
  double last_alpha() const { return last_alpha_; }

 private:
  // x_k = proj(sum_i a_i (mu y_i - g(y_i)) / (mu sum_i a_i)),
  // y_{k+1} = proj(x_k - g(x_k)/L), a_{k+1} = (mu/L) sum_{i<=k} a_i.
  void nag_step() {
    const VIProblem& p = *p_;
    x_ = project(p.set, dual_ / (p.mu * weight_sum_));
    counters_.proj += 1;
    const Point gx = p.g(x_);
    counters_.g_evals += 1;
    const Point y = project(p.set, x_ - gx / p.L);
    counters_.proj += 1;
    const Point gy = p.g(y);
    counters_.g_evals += 1;
    const double a = next_weight_;
    weight_sum_ += a;
    dual_ += a * (p.mu * y - gy);
    y_avg_ += (a / weight_sum_) * (y - y_avg_);
    next_weight_ = p.mu / p.L * weight_sum_;
  }

  const VIProblem* p_;
  BaselineConfig cfg_;
  Point x_;
  Point x_prev_;
  Point y_prev_;
  Point g_prev_;
  double alpha_prev_ = 0.0;
  double alpha_prev2_ = 0.0;
  double last_alpha_ = 0.0;
  double weight_sum_ = 0.0;
  double next_weight_ = 0.0;
  Point dual_;
  Point y_avg_;
  OracleCounters counters_;
  long iterations_ = 0;
};

struct PerStepCounts {
  long proj;
  long g_evals;
  long initial_g_evals;
};

// Analytic oracle cost of one iteration of each method.
inline PerStepCounts per_step_counts(BaselineMethod m) {
  switch (m) {
    case BaselineMethod::Extragradient: return {2, 2, 0};
    case BaselineMethod::NAG: return {2, 2, 1};
    default: return {1, 1, 0};
  }
}

}  // namespace fwvip
