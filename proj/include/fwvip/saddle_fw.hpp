#pragma once

// Frank-Wolfe oracle for strongly convex-concave saddle problems
//   min_{x in X} max_{y in Y} F(x, y)
// using only linear minimization over X and Y.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "fwvip/geometry.hpp"

namespace fwvip {

// Writes a partial gradient of F at (x, y) into `out`.
using PartialGradient = std::function<void(ConstPointRef x, ConstPointRef y, PointRef out)>;
using SaddleValue = std::function<double(ConstPointRef x, ConstPointRef y)>;

// Gradients of the form grad_x F = xx*x + xy*y + bx, grad_y F = yx*x + yy*y + by
// with scalar coefficients. Optional; when set, the solver evaluates the
// gradient inline instead of calling grad_x and grad_y.
struct IsotropicGradient {
  double xx = 0.0;
  double xy = 0.0;
  double yx = 0.0;
  double yy = 0.0;
  Point bx;
  Point by;
};

struct SaddleProblem {
  SaddleProblem(FeasibleSet x, FeasibleSet y) : set_x(std::move(x)), set_y(std::move(y)) {}

  FeasibleSet set_x;
  FeasibleSet set_y;
  PartialGradient grad_x;
  PartialGradient grad_y;
  // Optional; needed only by value-based stopping rules.
  SaddleValue value;
  double mu_x = 0.0;
  double mu_y = 0.0;
  double L0 = 0.0;
  double L_xy = 0.0;
  double L_yx = 0.0;
  std::optional<IsotropicGradient> isotropic;

  Index dim_x() const { return dimension(set_x); }
  Index dim_y() const { return dimension(set_y); }
  Index dim() const { return dim_x() + dim_y(); }
};

// alpha_k = min(1, nu/(2C) * fw_gap_k)
struct Adaptive {
  double nu;
  double C;
};

// alpha_k = 2/(2+k)
struct Harmonic {};

using StepsizeRule = std::variant<Adaptive, Harmonic>;

inline StepsizeRule adaptive_rule(double nu, double C) {
  if (!(nu > 0.0) || !(C > 0.0)) {
    throw std::invalid_argument("adaptive stepsize needs nu > 0 and C > 0");
  }
  return Adaptive{nu, C};
}

// Snapshot handed to a stop callback once per iteration, after the gap is
// known and before the step is taken.
struct SaddleIterate {
  long k;
  ConstPointRef z;
  ConstPointRef r;
  double fw_gap;
  double fw_gap_x;
  double fw_gap_y;
};

using StopCallback = std::function<bool(const SaddleIterate&)>;

struct SaddleTracePoint {
  long iter;
  double fw_gap;
};

struct SaddleOptions {
  bool record_trace = false;
  std::size_t trace_capacity = 100000;
  StopCallback stop;
};

struct SaddleResult {
  Point z;
  double fw_gap = 0.0;
  double fw_gap_x = 0.0;
  double fw_gap_y = 0.0;
  long iterations = 0;
  bool converged = false;
  bool stopped_early = false;
  // Two per gap evaluation: one over X and one over Y.
  long lmo_calls = 0;
  std::deque<SaddleTracePoint> trace;
};

inline void saddle_gradient_into(const SaddleProblem& p, ConstPointRef z, PointRef r) {
  const Index nx = p.dim_x();
  const Index ny = p.dim_y();
  if (p.isotropic) {
    const IsotropicGradient& q = *p.isotropic;
    r.head(nx) = q.xx * z.head(nx) + q.xy * z.tail(ny) + q.bx;
    r.tail(ny) = -(q.yx * z.head(nx) + q.yy * z.tail(ny) + q.by);
    return;
  }
  p.grad_x(z.head(nx), z.tail(ny), r.head(nx));
  p.grad_y(z.head(nx), z.tail(ny), r.tail(ny));
  r.tail(ny) = -r.tail(ny);
}

// r = (grad_x F(x,y), -grad_y F(x,y)) at z = (x, y).
inline Point saddle_gradient(const SaddleProblem& p, ConstPointRef z) {
  detail::require_dim(p.dim(), z.size(), "saddle_gradient");
  Point r(z.size());
  saddle_gradient_into(p, z, r);
  return r;
}

namespace detail {

// Box LMO coordinate: upper if r < 0, else lower. Selected with a bit mask
// rather than a branch: the sign of r flips unpredictably along FW paths.
inline double pick(double lower, double upper, double r) {
  const std::uint64_t take_upper = -static_cast<std::uint64_t>(r < 0.0);
  return std::bit_cast<double>((std::bit_cast<std::uint64_t>(lower) & ~take_upper) |
                               (std::bit_cast<std::uint64_t>(upper) & take_upper));
}

// One side of an isotropic gradient: r = sign (a zx + b zy + c), its LMO
// vertex s, and the side's FW gap <z_side - s, r>, in a single pass.
inline double isotropic_side(const std::vector<Segment>& segs, double a, double b,
                             const double* __restrict c, double sign, const double* __restrict zx,
                             const double* __restrict zy, const double* __restrict zside,
                             double* __restrict r, double* __restrict s) {
  double gap = 0.0;
  for (const Segment& g : segs) {
    const Index lo = g.offset;
    const Index hi = g.offset + g.dim;
    if (g.is_box) {
      for (Index i = lo; i < hi; ++i) {
        const double ri = sign * (a * zx[i] + b * zy[i] + c[i]);
        const double si = pick(g.lower[i - lo], g.upper[i - lo], ri);
        r[i] = ri;
        s[i] = si;
        gap += (zside[i] - si) * ri;
      }
    } else {
      Index best = lo;
      double r_best = std::numeric_limits<double>::infinity();
      double zr = 0.0;
      for (Index i = lo; i < hi; ++i) {
        const double ri = sign * (a * zx[i] + b * zy[i] + c[i]);
        r[i] = ri;
        s[i] = 0.0;
        zr += zside[i] * ri;
        const bool better = ri < r_best;
        best = better ? i : best;
        r_best = better ? ri : r_best;
      }
      s[best] = g.mass;
      gap += zr - g.mass * r_best;
    }
  }
  return gap;
}

// Joint-pass sweep over one box segment: the pending FW step
// z += alpha (s - z), the gradient at the new z and its LMO vertex. Free of
// reductions so that it vectorizes; both bounds are loaded up front so the
// select compiles to a blend.
inline void step_gradient_vertex(Index n, double alpha, const IsotropicGradient& q, double* __restrict zx,
                                 double* __restrict zy, double* __restrict rx, double* __restrict ry,
                                 double* __restrict sx, double* __restrict sy, const double* __restrict bx,
                                 const double* __restrict by, const double* __restrict lx,
                                 const double* __restrict ux, const double* __restrict ly,
                                 const double* __restrict uy) {
  const double xx = q.xx;
  const double xy = q.xy;
  const double yx = q.yx;
  const double yy = q.yy;
  for (Index i = 0; i < n; ++i) {
    const double x = zx[i] + alpha * (sx[i] - zx[i]);
    const double y = zy[i] + alpha * (sy[i] - zy[i]);
    zx[i] = x;
    zy[i] = y;
    const double ri = xx * x + xy * y + bx[i];
    const double rj = -(yx * x + yy * y + by[i]);
    rx[i] = ri;
    ry[i] = rj;
    const double l0 = lx[i];
    const double u0 = ux[i];
    const double l1 = ly[i];
    const double u1 = uy[i];
    sx[i] = ri < 0.0 ? u0 : l0;
    sy[i] = rj < 0.0 ? u1 : l1;
  }
}

inline bool same_layout(const std::vector<Segment>& a, const std::vector<Segment>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].is_box != b[i].is_box || a[i].offset != b[i].offset || a[i].dim != b[i].dim) return false;
  }
  return true;
}

// Both sides at once when X and Y share a layout: first the pending FW step,
// then r, s and the two gaps at the new z.
inline void isotropic_joint_pass(const std::vector<Segment>& seg_x, const std::vector<Segment>& seg_y,
                                 const IsotropicGradient& q, double alpha, Index n, double* z, double* r,
                                 double* s, double& gap_x, double& gap_y) {
  using Seg = Eigen::Map<const Point>;
  gap_x = 0.0;
  gap_y = 0.0;
  for (std::size_t b = 0; b < seg_x.size(); ++b) {
    const Segment& gx = seg_x[b];
    const Segment& gy = seg_y[b];
    const Index d = gx.dim;
    double* zx = z + gx.offset;
    double* zy = z + n + gx.offset;
    double* rx = r + gx.offset;
    double* ry = r + n + gx.offset;
    double* sx = s + gx.offset;
    double* sy = s + n + gx.offset;
    const double* bx = q.bx.data() + gx.offset;
    const double* by = q.by.data() + gx.offset;
    if (gx.is_box) {
      step_gradient_vertex(d, alpha, q, zx, zy, rx, ry, sx, sy, bx, by, gx.lower, gx.upper, gy.lower, gy.upper);
      gap_x += (Seg(zx, d) - Seg(sx, d)).dot(Seg(rx, d));
      gap_y += (Seg(zy, d) - Seg(sy, d)).dot(Seg(ry, d));
    } else {
      // Simplex blocks are short; one scalar loop beats per-block library calls.
      Index best_x = 0;
      Index best_y = 0;
      double min_x = std::numeric_limits<double>::infinity();
      double min_y = std::numeric_limits<double>::infinity();
      double zr_x = 0.0;
      double zr_y = 0.0;
      for (Index i = 0; i < d; ++i) {
        const double x = zx[i] + alpha * (sx[i] - zx[i]);
        const double y = zy[i] + alpha * (sy[i] - zy[i]);
        zx[i] = x;
        zy[i] = y;
        const double ri = q.xx * x + q.xy * y + bx[i];
        const double rj = -(q.yx * x + q.yy * y + by[i]);
        rx[i] = ri;
        ry[i] = rj;
        sx[i] = 0.0;
        sy[i] = 0.0;
        zr_x += x * ri;
        zr_y += y * rj;
        const bool x_better = ri < min_x;
        best_x = x_better ? i : best_x;
        min_x = x_better ? ri : min_x;
        const bool y_better = rj < min_y;
        best_y = y_better ? i : best_y;
        min_y = y_better ? rj : min_y;
      }
      sx[best_x] = gx.mass;
      sy[best_y] = gy.mass;
      gap_x += zr_x - gx.mass * min_x;
      gap_y += zr_y - gy.mass * min_y;
    }
  }
}

}  // namespace detail

inline SaddleResult solve_saddle(const SaddleProblem& p, const StepsizeRule& rule, double epsilon,
                                 long max_iter, ConstPointRef z0,
                                 const SaddleOptions& options = {}) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("solve_saddle: epsilon must be > 0");
  if (max_iter < 0) throw std::invalid_argument("solve_saddle: max_iter must be >= 0");
  detail::require_dim(p.dim(), z0.size(), "solve_saddle");
  const Index nx = p.dim_x();
  const Index ny = p.dim_y();
  if (!contains(p.set_x, z0.head(nx)) || !contains(p.set_y, z0.tail(ny))) {
    throw std::invalid_argument("solve_saddle: starting point is infeasible");
  }
  if (p.isotropic && (nx != ny || p.isotropic->bx.size() != nx || p.isotropic->by.size() != ny)) {
    throw std::invalid_argument("solve_saddle: isotropic gradient needs equal block dimensions");
  }

  SaddleResult res;
  res.z = z0;
  Point r(p.dim());
  Point s(p.dim());
  Point& z = res.z;

  // Fused gradient/LMO/gap pass for isotropic gradients over bounded sets.
  std::vector<detail::Segment> seg_x;
  std::vector<detail::Segment> seg_y;
  if (p.isotropic) {
    seg_x = detail::flatten(p.set_x);
    seg_y = detail::flatten(p.set_y);
  }
  const bool fused = !seg_x.empty() && !seg_y.empty();
  const bool joint = fused && detail::same_layout(seg_x, seg_y);
  // The joint pass applies each step at the start of the next sweep.
  double pending_alpha = 0.0;
  if (joint) s = z;

  for (long k = 0;; ++k) {
    if (joint) {
      detail::isotropic_joint_pass(seg_x, seg_y, *p.isotropic, pending_alpha, nx, z.data(), r.data(), s.data(),
                                   res.fw_gap_x, res.fw_gap_y);
    } else if (fused) {
      const IsotropicGradient& q = *p.isotropic;
      const double* zx = z.data();
      const double* zy = z.data() + nx;
      res.fw_gap_x = detail::isotropic_side(seg_x, q.xx, q.xy, q.bx.data(), 1.0, zx, zy, zx, r.data(), s.data());
      res.fw_gap_y = detail::isotropic_side(seg_y, q.yx, q.yy, q.by.data(), -1.0, zx, zy, zy, r.data() + nx,
                                            s.data() + nx);
    } else {
      saddle_gradient_into(p, z, r);
      lmo_into(p.set_x, r.head(nx), s.head(nx));
      lmo_into(p.set_y, r.tail(ny), s.tail(ny));
      res.fw_gap_x = (z.head(nx) - s.head(nx)).dot(r.head(nx));
      res.fw_gap_y = (z.tail(ny) - s.tail(ny)).dot(r.tail(ny));
    }
    res.lmo_calls += 2;
    res.fw_gap = res.fw_gap_x + res.fw_gap_y;
    res.iterations = k;

    if (options.record_trace) {
      if (res.trace.size() == options.trace_capacity) res.trace.pop_front();
      res.trace.push_back({k, res.fw_gap});
    }
    if (res.fw_gap <= epsilon) {
      res.converged = true;
      break;
    }
    if (options.stop && options.stop(SaddleIterate{k, z, r, res.fw_gap, res.fw_gap_x, res.fw_gap_y})) {
      res.stopped_early = true;
      break;
    }
    if (k == max_iter) break;

    double alpha = 0.0;
    if (const auto* a = std::get_if<Adaptive>(&rule)) {
      alpha = a->nu / (2.0 * a->C) * res.fw_gap;
    } else {
      alpha = 2.0 / (2.0 + static_cast<double>(k));
    }
    alpha = std::clamp(alpha, 0.0, 1.0);
    if (joint) {
      pending_alpha = alpha;
    } else {
      z += alpha * (s - z);
    }
  }
  return res;
}

// Constants of the linear-rate stepsize. sigma_x, sigma_y are the distances
// of the saddle point to the boundaries of X and Y.
struct SaddleConstants {
  double sigma_mu = 0.0;
  double nu = 0.0;
  double C = 0.0;
  double rho = 0.0;
  // False when nu <= 0; the caller has to use the harmonic rule instead.
  bool adaptive_applicable = false;
};

inline SaddleConstants saddle_rate_constants(double D_x, double D_y, double L0, double L_xy,
                                             double L_yx, double mu_x, double mu_y,
                                             double sigma_x, double sigma_y) {
  for (double v : {D_x, D_y, L0, mu_x, mu_y, sigma_x, sigma_y}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("saddle_rate_constants: diameters, L0, moduli and border "
                                  "distances must be positive");
    }
  }
  if (!(L_xy >= 0.0) || !(L_yx >= 0.0)) {
    throw std::invalid_argument("saddle_rate_constants: cross constants must be >= 0");
  }
  SaddleConstants c;
  c.sigma_mu = std::sqrt(std::min(mu_x * sigma_x * sigma_x, mu_y * sigma_y * sigma_y));
  c.C = 0.5 * (L0 * D_x * D_x + L0 * D_y * D_y);
  const double coupling = std::max(D_x * L_xy / std::sqrt(mu_y), D_y * L_yx / std::sqrt(mu_x));
  c.nu = 1.0 - std::sqrt(2.0) / c.sigma_mu * coupling;
  c.rho = c.nu * c.nu * c.sigma_mu * c.sigma_mu / (2.0 * c.C);
  c.adaptive_applicable = c.nu > 0.0;
  return c;
}

inline StepsizeRule select_rule(const SaddleConstants& c) {
  if (c.adaptive_applicable) return Adaptive{c.nu, c.C};
  return Harmonic{};
}

}  // namespace fwvip
