#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "fwvip/geometry.hpp"
#include "fwvip/rng.hpp"

namespace fwvip {

using Matrix = Eigen::MatrixXd;

// A deterministic map g : R^dim -> R^dim.
struct VectorField {
  Index dim = 0;
  std::function<Point(const Point&)> eval;

  Point operator()(const Point& x) const {
    detail::require_dim(dim, x.size(), "VectorField");
    Point out = eval(x);
    detail::require_dim(dim, out.size(), "VectorField output");
    return out;
  }
};

// g(x) = M x + b.
struct AffineOperator {
  Matrix matrix;
  Point offset;

  AffineOperator(Matrix m, Point b) : matrix(std::move(m)), offset(std::move(b)) {
    if (matrix.rows() != matrix.cols() || matrix.rows() != offset.size()) {
      throw std::invalid_argument("AffineOperator: matrix must be square and match offset");
    }
  }

  Index dim() const { return offset.size(); }
  Point operator()(const Point& x) const { return matrix * x + offset; }

  VectorField field() const {
    return VectorField{dim(), [m = matrix, b = offset](const Point& x) -> Point { return m * x + b; }};
  }

  // Smallest eigenvalue of (M + M^T)/2, the exact strong-monotonicity modulus.
  double strong_monotonicity() const {
    const Matrix sym = 0.5 * (matrix + matrix.transpose());
    return Eigen::SelfAdjointEigenSolver<Matrix>(sym, Eigen::EigenvaluesOnly).eigenvalues()(0);
  }

  // ||M||_2, the exact Lipschitz constant.
  double lipschitz() const {
    return Eigen::JacobiSVD<Matrix>(matrix).singularValues()(0);
  }
};

struct AffineInstance {
  AffineOperator op;
  Box box;
  double mu;
  double L;
  double gamma() const { return L / mu; }
};

// M = mu*I + skew_scale*(A - A^T)/2 with A uniform on [-1,1], b uniform on
// [-1,1], feasible set [-1,1]^dim. The symmetric part of M is exactly mu*I.
inline AffineInstance make_affine_instance(Index dim, double mu, double skew_scale,
                                           std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("make_affine_instance: dim must be >= 1");
  if (!(mu > 0.0)) throw std::invalid_argument("make_affine_instance: mu must be > 0");
  CounterRng mat_rng(seed, 1);
  Matrix a(dim, dim);
  for (Index i = 0; i < dim; ++i) {
    for (Index j = 0; j < dim; ++j) a(i, j) = mat_rng.uniform(-1.0, 1.0);
  }
  CounterRng vec_rng(seed, 2);
  Point b(dim);
  for (Index i = 0; i < dim; ++i) b[i] = vec_rng.uniform(-1.0, 1.0);

  Matrix m = mu * Matrix::Identity(dim, dim) + skew_scale * 0.5 * (a - a.transpose());
  AffineOperator op(std::move(m), std::move(b));
  const double lip = op.lipschitz();
  return AffineInstance{std::move(op), Box::uniform(dim, -1.0, 1.0), mu, lip};
}

struct ConstantsEstimate {
  double mu_hat = 0.0;
  double L_hat = 0.0;
  double gamma_hat = 0.0;
  long n_samples = 0;
  std::uint64_t seed = 0;
  // Smallest observed <g(x)-g(y), x-y>/|x-y|^2 before clipping and safety factor.
  double raw_mu = 0.0;
  // Largest observed |g(x)-g(y)|/|x-y| before the safety factor.
  double raw_L = 0.0;
  bool non_monotone = false;
};

inline constexpr double kMuSafety = 0.9;
inline constexpr double kLipschitzSafety = 1.1;
inline constexpr double kMuFloor = 1e-12;

// Sampling estimate of the strong-monotonicity and Lipschitz constants of g
// over `set`. Pair i is drawn from stream (seed, i), so a run with more
// samples sees a superset of the pairs of a run with fewer.
inline ConstantsEstimate estimate_constants(const VectorField& g, const FeasibleSet& set,
                                            long n_samples, std::uint64_t seed) {
  if (n_samples < 2) throw std::invalid_argument("estimate_constants: n_samples must be >= 2");
  detail::require_dim(dimension(set), g.dim, "estimate_constants");

  double min_ratio = std::numeric_limits<double>::infinity();
  double max_lip = 0.0;
  long used = 0;
  for (long i = 0; i < n_samples; ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i));
    const Point x = sample(set, rng);
    const Point y = sample(set, rng);
    const Point dx = x - y;
    const double dist2 = dx.squaredNorm();
    if (!(dist2 > 0.0)) continue;
    const Point dg = g(x) - g(y);
    min_ratio = std::min(min_ratio, dg.dot(dx) / dist2);
    max_lip = std::max(max_lip, dg.norm() / std::sqrt(dist2));
    ++used;
  }
  if (used == 0) {
    throw std::invalid_argument("estimate_constants: feasible set is a single point");
  }

  ConstantsEstimate est;
  est.n_samples = n_samples;
  est.seed = seed;
  est.raw_mu = min_ratio;
  est.raw_L = max_lip;
  est.non_monotone = min_ratio < 0.0;
  est.mu_hat = kMuSafety * std::max(min_ratio, kMuFloor);
  est.L_hat = std::max(kLipschitzSafety * max_lip, est.mu_hat);
  est.gamma_hat = est.L_hat / est.mu_hat;
  return est;
}

}  // namespace fwvip
