#pragma once

// Feasible sets with exact linear minimization oracles and exact Euclidean
// projections: boxes, scaled simplices, and Cartesian products of the two.
// Every operation is a pure function of an immutable set description.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "fwvip/rng.hpp"

namespace fwvip {

using Point = Eigen::VectorXd;
using PointRef = Eigen::Ref<Eigen::VectorXd>;
using ConstPointRef = Eigen::Ref<const Eigen::VectorXd>;
using Index = Eigen::Index;

// Raised when an operation needs a bounded set (diameter, LMO along an
// unbounded coordinate).
class UnsupportedError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace detail {

inline void require_dim(Index expected, Index got, const char* what) {
  if (expected != got) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (expected " +
                                std::to_string(expected) + ", got " + std::to_string(got) + ")");
  }
}

inline bool all_finite(ConstPointRef x) { return x.allFinite(); }

}  // namespace detail

// Axis-aligned box {x : lower <= x <= upper}. Infinite bounds are allowed;
// such a box supports projection and membership but not diameter.
class Box {
 public:
  Box(Point lower, Point upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size() || lower_.size() == 0) {
      throw std::invalid_argument("Box: bounds must be nonempty and of equal length");
    }
    for (Index i = 0; i < lower_.size(); ++i) {
      if (std::isnan(lower_[i]) || std::isnan(upper_[i]) || lower_[i] > upper_[i]) {
        throw std::invalid_argument("Box: lower[" + std::to_string(i) + "] > upper[" +
                                    std::to_string(i) + "]");
      }
    }
    bounded_ = lower_.allFinite() && upper_.allFinite();
  }

  static Box uniform(Index dim, double lo, double hi) {
    return Box(Point::Constant(dim, lo), Point::Constant(dim, hi));
  }
  static Box unit(Index dim) { return uniform(dim, 0.0, 1.0); }

  Index dim() const { return lower_.size(); }
  const Point& lower() const { return lower_; }
  const Point& upper() const { return upper_; }
  bool bounded() const { return bounded_; }

  friend bool operator==(const Box& a, const Box& b) {
    return a.lower_ == b.lower_ && a.upper_ == b.upper_;
  }

 private:
  Point lower_;
  Point upper_;
  bool bounded_ = false;
};

// {x : x >= 0, sum(x) = mass}. mass == 0 degenerates to the origin and
// dim == 1 to the single point (mass).
class ScaledSimplex {
 public:
  ScaledSimplex(Index dim, double mass) : dim_(dim), mass_(mass) {
    if (dim < 1) throw std::invalid_argument("ScaledSimplex: dim must be >= 1");
    if (!(mass >= 0.0) || !std::isfinite(mass)) {
      throw std::invalid_argument("ScaledSimplex: mass must be finite and >= 0");
    }
  }

  Index dim() const { return dim_; }
  double mass() const { return mass_; }

  friend bool operator==(const ScaledSimplex& a, const ScaledSimplex& b) {
    return a.dim_ == b.dim_ && a.mass_ == b.mass_;
  }

 private:
  Index dim_;
  double mass_;
};

using Block = std::variant<Box, ScaledSimplex>;

// Cartesian product of boxes and simplices laid out contiguously.
class ProductSet {
 public:
  explicit ProductSet(std::vector<Block> blocks) : blocks_(std::move(blocks)) {
    if (blocks_.empty()) throw std::invalid_argument("ProductSet: needs at least one block");
    offsets_.reserve(blocks_.size() + 1);
    offsets_.push_back(0);
    for (const auto& b : blocks_) {
      offsets_.push_back(offsets_.back() + std::visit([](const auto& s) { return s.dim(); }, b));
    }
  }

  Index dim() const { return offsets_.back(); }
  std::size_t num_blocks() const { return blocks_.size(); }
  const std::vector<Block>& blocks() const { return blocks_; }
  const Block& block(std::size_t i) const { return blocks_[i]; }
  Index offset(std::size_t i) const { return offsets_[i]; }
  Index block_dim(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }

  friend bool operator==(const ProductSet& a, const ProductSet& b) { return a.blocks_ == b.blocks_; }

 private:
  std::vector<Block> blocks_;
  std::vector<Index> offsets_;
};

using FeasibleSet = std::variant<Box, ScaledSimplex, ProductSet>;

// ---------------------------------------------------------------------------
// dimension

inline Index dimension(const Box& s) { return s.dim(); }
inline Index dimension(const ScaledSimplex& s) { return s.dim(); }
inline Index dimension(const ProductSet& s) { return s.dim(); }
inline Index dimension(const FeasibleSet& s) {
  return std::visit([](const auto& v) { return dimension(v); }, s);
}

// ---------------------------------------------------------------------------
// Linear minimization oracle: out = argmin_{x in set} <x, direction>.
// Returns a vertex; ties go to the lowest index (simplex) or the lower bound
// (box coordinate with zero direction).

inline void lmo_into(const Box& s, ConstPointRef d, PointRef out) {
  if (s.bounded()) {
    const double* lo = s.lower().data();
    const double* hi = s.upper().data();
    for (Index i = 0; i < d.size(); ++i) {
      const double bounds[2] = {lo[i], hi[i]};
      out[i] = bounds[d[i] < 0.0];
    }
    return;
  }
  for (Index i = 0; i < d.size(); ++i) {
    const double lo = s.lower()[i];
    const double hi = s.upper()[i];
    if (d[i] == 0.0) {
      // Every point is a minimizer along this coordinate.
      out[i] = std::isfinite(lo) ? lo : (std::isfinite(hi) ? hi : 0.0);
      continue;
    }
    const double v = d[i] < 0.0 ? hi : lo;
    if (!std::isfinite(v)) {
      throw UnsupportedError("lmo: linear function unbounded below on box coordinate " +
                             std::to_string(i));
    }
    out[i] = v;
  }
}

inline void lmo_into(const ScaledSimplex& s, ConstPointRef d, PointRef out) {
  Index best = 0;
  for (Index i = 1; i < d.size(); ++i) {
    if (d[i] < d[best]) best = i;
  }
  out.setZero();
  out[best] = s.mass();
}

inline void lmo_into(const ProductSet& s, ConstPointRef d, PointRef out) {
  for (std::size_t b = 0; b < s.num_blocks(); ++b) {
    const Index off = s.offset(b);
    const Index n = s.block_dim(b);
    std::visit([&](const auto& blk) { lmo_into(blk, d.segment(off, n), out.segment(off, n)); },
               s.block(b));
  }
}

inline void lmo_into(const FeasibleSet& s, ConstPointRef d, PointRef out) {
  detail::require_dim(dimension(s), d.size(), "lmo");
  detail::require_dim(dimension(s), out.size(), "lmo");
  std::visit([&](const auto& v) { lmo_into(v, d, out); }, s);
}

inline Point lmo(const FeasibleSet& s, ConstPointRef d) {
  Point out(dimension(s));
  lmo_into(s, d, out);
  return out;
}

// ---------------------------------------------------------------------------
// Euclidean projection.

inline void project_into(const Box& s, ConstPointRef p, PointRef out) {
  out = p.cwiseMax(s.lower()).cwiseMin(s.upper());
}

// Sort-based exact projection onto {x >= 0, sum x = mass}.
inline void project_into(const ScaledSimplex& s, ConstPointRef p, PointRef out) {
  const Index n = p.size();
  if (s.mass() == 0.0) {
    out.setZero();
    return;
  }
  if (n == 1) {
    out[0] = s.mass();
    return;
  }
  std::vector<double> u(p.data(), p.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (Index j = 0; j < n; ++j) {
    cumsum += u[j];
    const double t = (cumsum - s.mass()) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  out = (p.array() - theta).cwiseMax(0.0);
}

inline void project_into(const ProductSet& s, ConstPointRef p, PointRef out) {
  for (std::size_t b = 0; b < s.num_blocks(); ++b) {
    const Index off = s.offset(b);
    const Index n = s.block_dim(b);
    std::visit(
        [&](const auto& blk) { project_into(blk, p.segment(off, n), out.segment(off, n)); },
        s.block(b));
  }
}

inline void project_into(const FeasibleSet& s, ConstPointRef p, PointRef out) {
  detail::require_dim(dimension(s), p.size(), "project");
  detail::require_dim(dimension(s), out.size(), "project");
  std::visit([&](const auto& v) { project_into(v, p, out); }, s);
}

inline Point project(const FeasibleSet& s, ConstPointRef p) {
  Point out(dimension(s));
  project_into(s, p, out);
  return out;
}

// ---------------------------------------------------------------------------
// Euclidean diameter.

inline double diameter(const Box& s) {
  if (!s.bounded()) throw UnsupportedError("diameter: box is unbounded");
  return (s.upper() - s.lower()).norm();
}

inline double diameter(const ScaledSimplex& s) {
  return s.dim() >= 2 ? s.mass() * std::sqrt(2.0) : 0.0;
}

inline double diameter(const ProductSet& s) {
  double sq = 0.0;
  for (const auto& b : s.blocks()) {
    const double d = std::visit([](const auto& blk) { return diameter(blk); }, b);
    sq += d * d;
  }
  return std::sqrt(sq);
}

inline double diameter(const FeasibleSet& s) {
  return std::visit([](const auto& v) { return diameter(v); }, s);
}

// ---------------------------------------------------------------------------
// Membership, tolerance 1e-9 relative to the box width or simplex mass.

inline bool contains(const Box& s, ConstPointRef x) {
  if (x.size() != s.dim()) return false;
  for (Index i = 0; i < x.size(); ++i) {
    const double w = s.upper()[i] - s.lower()[i];
    const double tol = std::isfinite(w) ? 1e-9 * w + 1e-15 : 1e-9 * std::max(1.0, std::abs(x[i]));
    if (!(x[i] >= s.lower()[i] - tol && x[i] <= s.upper()[i] + tol)) return false;
  }
  return true;
}

inline bool contains(const ScaledSimplex& s, ConstPointRef x) {
  const double tol = 1e-9 * s.mass() + 1e-15;
  return x.size() == s.dim() && x.allFinite() && x.minCoeff() >= -tol &&
         std::abs(x.sum() - s.mass()) <= tol;
}

inline bool contains(const ProductSet& s, ConstPointRef x) {
  for (std::size_t b = 0; b < s.num_blocks(); ++b) {
    const auto seg = x.segment(s.offset(b), s.block_dim(b));
    if (!std::visit([&](const auto& blk) { return contains(blk, seg); }, s.block(b))) return false;
  }
  return true;
}

inline bool contains(const FeasibleSet& s, ConstPointRef x) {
  if (x.size() != dimension(s) || !detail::all_finite(x)) return false;
  return std::visit([&](const auto& v) { return contains(v, x); }, s);
}

// ---------------------------------------------------------------------------
// A canonical feasible point: box midpoint (clamped to a finite bound, or 0
// when both bounds are infinite) and the simplex barycenter.

inline void center_into(const Box& s, PointRef out) {
  for (Index i = 0; i < s.dim(); ++i) {
    const double lo = s.lower()[i];
    const double hi = s.upper()[i];
    if (std::isfinite(lo) && std::isfinite(hi)) {
      out[i] = 0.5 * (lo + hi);
    } else {
      out[i] = std::clamp(0.0, lo, hi);
    }
  }
}

inline void center_into(const ScaledSimplex& s, PointRef out) {
  out.setConstant(s.mass() / static_cast<double>(s.dim()));
}

inline void center_into(const ProductSet& s, PointRef out) {
  for (std::size_t b = 0; b < s.num_blocks(); ++b) {
    auto seg = out.segment(s.offset(b), s.block_dim(b));
    std::visit([&](const auto& blk) { center_into(blk, seg); }, s.block(b));
  }
}

inline Point center(const FeasibleSet& s) {
  Point out(dimension(s));
  std::visit([&](const auto& v) { center_into(v, out); }, s);
  return out;
}

// ---------------------------------------------------------------------------
// Uniform sampling: uniform on boxes, flat Dirichlet on simplices, blockwise
// on products.

inline void sample_into(const Box& s, CounterRng& rng, PointRef out) {
  if (!s.bounded()) throw UnsupportedError("sample: box is unbounded");
  for (Index i = 0; i < s.dim(); ++i) out[i] = rng.uniform(s.lower()[i], s.upper()[i]);
}

inline void sample_into(const ScaledSimplex& s, CounterRng& rng, PointRef out) {
  double total = 0.0;
  for (Index i = 0; i < s.dim(); ++i) {
    out[i] = rng.exponential();
    total += out[i];
  }
  out = s.mass() * (out / total);
}

inline void sample_into(const ProductSet& s, CounterRng& rng, PointRef out) {
  for (std::size_t b = 0; b < s.num_blocks(); ++b) {
    auto seg = out.segment(s.offset(b), s.block_dim(b));
    std::visit([&](const auto& blk) { sample_into(blk, rng, seg); }, s.block(b));
  }
}

inline Point sample(const FeasibleSet& s, CounterRng& rng) {
  Point out(dimension(s));
  std::visit([&](const auto& v) { sample_into(v, rng, out); }, s);
  return out;
}

// ---------------------------------------------------------------------------
// Flat view of a set as contiguous segments, for tight inner loops.

namespace detail {

struct Segment {
  bool is_box = false;
  Index offset = 0;
  Index dim = 0;
  const double* lower = nullptr;
  const double* upper = nullptr;
  double mass = 0.0;
};

// Empty when some box is unbounded. Pointers refer into `set`.
inline std::vector<Segment> flatten(const FeasibleSet& set) {
  std::vector<Segment> out;
  bool ok = true;
  auto add = [&](const auto& blk, Index off) {
    using T = std::decay_t<decltype(blk)>;
    if constexpr (std::is_same_v<T, Box>) {
      ok = ok && blk.bounded();
      out.push_back({true, off, blk.dim(), blk.lower().data(), blk.upper().data(), 0.0});
    } else {
      out.push_back({false, off, blk.dim(), nullptr, nullptr, blk.mass()});
    }
  };
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ProductSet>) {
          for (std::size_t b = 0; b < s.num_blocks(); ++b) {
            std::visit([&](const auto& blk) { add(blk, s.offset(b)); }, s.block(b));
          }
        } else {
          add(s, 0);
        }
      },
      set);
  if (!ok) out.clear();
  return out;
}

}  // namespace detail

}  // namespace fwvip
