#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fwvip/saddle_fw.hpp"
#include "oracles.hpp"
#include "saddle_fixtures.hpp"

using namespace fwvip;

namespace {

Point vec(std::initializer_list<double> v) {
  Point p(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

// F(x, y) = p x^2/2 + q x y - r y^2/2 in one dimension on a large box.
SaddleProblem scalar_quadratic(double p, double q, double r, double box = 100.0) {
  SaddleProblem sp(Box::uniform(1, -box, box), Box::uniform(1, -box, box));
  sp.grad_x = [p, q](ConstPointRef x, ConstPointRef y, PointRef out) { out[0] = p * x[0] + q * y[0]; };
  sp.grad_y = [q, r](ConstPointRef x, ConstPointRef y, PointRef out) { out[0] = q * x[0] - r * y[0]; };
  sp.value = [p, q, r](ConstPointRef x, ConstPointRef y) {
    return 0.5 * p * x[0] * x[0] + q * x[0] * y[0] - 0.5 * r * y[0] * y[0];
  };
  return sp;
}

// F(x, y) = (x - 0.3)^2/2 - (y - 0.6)^2/2 on [0,1]^2.
SaddleProblem shifted_quadratic() {
  SaddleProblem sp(Box::unit(1), Box::unit(1));
  sp.grad_x = [](ConstPointRef x, ConstPointRef, PointRef out) { out[0] = x[0] - 0.3; };
  sp.grad_y = [](ConstPointRef, ConstPointRef y, PointRef out) { out[0] = -(y[0] - 0.6); };
  sp.mu_x = sp.mu_y = sp.L0 = 1.0;
  return sp;
}

}  // namespace

TEST(SaddleGradient, Examples) {
  EXPECT_EQ(saddle_gradient(scalar_quadratic(1, 0, 1), vec({1, 1})), vec({1, 1}));
  EXPECT_EQ(saddle_gradient(scalar_quadratic(0, 1, 0), vec({2, 3})), vec({3, -2}));
  EXPECT_EQ(saddle_gradient(scalar_quadratic(1, 1, 2), vec({1, 1})), vec({2, 1}));
}

TEST(SaddleGradient, MatchesFiniteDifferences) {
  const auto q = fixture::interior_instance();
  const SaddleProblem sp = q.problem();
  CounterRng rng(201, 0);
  for (int t = 0; t < 20; ++t) {
    const Point z = oracle::uniform_point(rng, 4, 0.0, 1.0);
    const Point r = saddle_gradient(sp, z);
    const double h = 1e-6;
    for (Index i = 0; i < 4; ++i) {
      Point zp = z;
      Point zm = z;
      zp[i] += h;
      zm[i] -= h;
      const double fd = (q.value(zp.head(2), zp.tail(2)) - q.value(zm.head(2), zm.tail(2))) / (2 * h);
      EXPECT_NEAR(r[i], i < 2 ? fd : -fd, 1e-8);
    }
  }
}

TEST(SaddleGradient, RejectsWrongDimension) {
  EXPECT_THROW(saddle_gradient(scalar_quadratic(1, 0, 1), vec({1, 1, 1})), std::invalid_argument);
}

TEST(SolveSaddle, ReturnsStartWhenGapAlreadySmall) {
  const SaddleProblem sp = shifted_quadratic();
  const Point z0 = vec({1, 0});
  const auto res = solve_saddle(sp, Harmonic{}, 1e9, 100, z0);
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(res.iterations, 0);
  EXPECT_EQ(res.z, z0);
  EXPECT_EQ(res.lmo_calls, 2);
}

TEST(SolveSaddle, AdaptiveRuleFindsInteriorSaddle) {
  const SaddleProblem sp = shifted_quadratic();
  const auto c = saddle_rate_constants(1, 1, 1, 0, 0, 1, 1, 0.3, 0.4);
  ASSERT_TRUE(c.adaptive_applicable);
  const auto res = solve_saddle(sp, select_rule(c), 1e-14, 100000, vec({1, 0}));
  EXPECT_TRUE(res.converged);
  EXPECT_LE((res.z - vec({0.3, 0.6})).norm(), 1e-6);
}

TEST(SolveSaddle, HarmonicGapDecaysSublinearly) {
  const SaddleProblem sp = shifted_quadratic();
  SaddleOptions opt;
  opt.record_trace = true;
  const auto res = solve_saddle(sp, Harmonic{}, 1e-300, 10000, vec({1, 0}), opt);
  ASSERT_EQ(res.trace.size(), 10001u);
  // Least-squares slope of log(gap) against log(k) over the running max of
  // the gap, which removes the zig-zag of individual FW iterates.
  std::vector<double> lx;
  std::vector<double> ly;
  double env = 0.0;
  for (auto it = res.trace.rbegin(); it != res.trace.rend(); ++it) {
    env = std::max(env, it->fw_gap);
    if (it->iter >= 10 && (it->iter % 10) == 0) {
      lx.push_back(std::log(static_cast<double>(it->iter)));
      ly.push_back(std::log(env));
    }
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= lx.size();
  my /= ly.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  EXPECT_LE(sxy / sxx, -0.8);
}

TEST(SolveSaddle, IteratesStayFeasibleAndGapNonnegative) {
  const auto q = fixture::interior_instance();
  const SaddleProblem sp = q.problem();
  SaddleOptions opt;
  long seen = 0;
  opt.stop = [&](const SaddleIterate& it) {
    EXPECT_GE(it.fw_gap, -1e-12);
    EXPECT_GE(it.fw_gap_x, -1e-12);
    EXPECT_GE(it.fw_gap_y, -1e-12);
    EXPECT_TRUE(contains(sp.set_x, it.z.head(2)));
    EXPECT_TRUE(contains(sp.set_y, it.z.tail(2)));
    ++seen;
    return false;
  };
  const auto res = solve_saddle(sp, Harmonic{}, 1e-300, 500, vec({1, 1, 0, 0}), opt);
  EXPECT_FALSE(res.converged);
  EXPECT_EQ(res.iterations, 500);
  EXPECT_EQ(seen, 501);
  EXPECT_EQ(res.lmo_calls, 2 * 501);
}

TEST(SolveSaddle, StopCallbackEndsEarly) {
  const SaddleProblem sp = shifted_quadratic();
  SaddleOptions opt;
  opt.stop = [](const SaddleIterate& it) { return it.k == 7; };
  const auto res = solve_saddle(sp, Harmonic{}, 1e-300, 100, vec({1, 0}), opt);
  EXPECT_TRUE(res.stopped_early);
  EXPECT_FALSE(res.converged);
  EXPECT_EQ(res.iterations, 7);
}

TEST(SolveSaddle, TraceIsRingBuffered) {
  const SaddleProblem sp = shifted_quadratic();
  SaddleOptions opt;
  opt.record_trace = true;
  opt.trace_capacity = 5;
  const auto res = solve_saddle(sp, Harmonic{}, 1e-300, 20, vec({1, 0}), opt);
  ASSERT_EQ(res.trace.size(), 5u);
  EXPECT_EQ(res.trace.front().iter, 16);
  EXPECT_EQ(res.trace.back().iter, 20);
}

TEST(SolveSaddle, RejectsBadArguments) {
  const SaddleProblem sp = shifted_quadratic();
  EXPECT_THROW(solve_saddle(sp, Harmonic{}, 0.0, 10, vec({1, 0})), std::invalid_argument);
  EXPECT_THROW(solve_saddle(sp, Harmonic{}, 1e-3, 10, vec({2, 0})), std::invalid_argument);
  EXPECT_THROW(solve_saddle(sp, Harmonic{}, 1e-3, -1, vec({1, 0})), std::invalid_argument);
  EXPECT_THROW(solve_saddle(sp, Harmonic{}, 1e-3, 10, vec({1, 0, 0})), std::invalid_argument);
  EXPECT_THROW(adaptive_rule(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(adaptive_rule(1.0, -1.0), std::invalid_argument);
}

TEST(SolveSaddle, IsotropicPathMatchesCallbacks) {
  // Same problem expressed through callbacks and through the fused
  // isotropic gradient, over a product of simplices and a box.
  const FeasibleSet set = ProductSet({ScaledSimplex(3, 0.5), Box::uniform(2, -1.0, 2.0), ScaledSimplex(1, 0.2)});
  const Point bx = vec({0.3, -0.2, 0.1, 0.5, -0.4, 0.0});
  const Point by = vec({-0.1, 0.4, 0.2, -0.3, 0.6, 1.0});
  const double xx = 1.7, xy = -0.4, yx = -0.4, yy = -0.9;
  SaddleProblem generic(set, set);
  generic.grad_x = [=](ConstPointRef x, ConstPointRef y, PointRef out) { out = xx * x + xy * y + bx; };
  generic.grad_y = [=](ConstPointRef x, ConstPointRef y, PointRef out) { out = yx * x + yy * y + by; };
  SaddleProblem fused = generic;
  fused.isotropic = IsotropicGradient{xx, xy, yx, yy, bx, by};
  Point z0(12);
  z0 << center(set), center(set);
  for (const StepsizeRule& rule : {StepsizeRule{Harmonic{}}, StepsizeRule{Adaptive{0.5, 3.0}}}) {
    const auto a = solve_saddle(generic, rule, 1e-300, 300, z0);
    const auto b = solve_saddle(fused, rule, 1e-300, 300, z0);
    EXPECT_LE((a.z - b.z).norm(), 1e-12);
    EXPECT_NEAR(a.fw_gap, b.fw_gap, 1e-12);
    EXPECT_EQ(a.lmo_calls, b.lmo_calls);
  }
}

TEST(SolveSaddle, IsotropicPathWithDifferentBlockSetsMatchesCallbacks) {
  // X and Y of equal dimension but different structure, so each side is
  // swept on its own.
  const FeasibleSet set_x = ProductSet({Box::uniform(3, -1.0, 1.0), ScaledSimplex(2, 1.0)});
  const FeasibleSet set_y = ProductSet({ScaledSimplex(4, 2.0), Box::uniform(1, 0.0, 3.0)});
  const Point bx = vec({0.2, -0.5, 0.1, 0.3, -0.1});
  const Point by = vec({0.4, -0.2, 0.0, 0.1, -0.6});
  const double xx = 2.0, xy = 0.3, yx = 0.3, yy = -1.1;
  SaddleProblem generic(set_x, set_y);
  generic.grad_x = [=](ConstPointRef x, ConstPointRef y, PointRef out) { out = xx * x + xy * y + bx; };
  generic.grad_y = [=](ConstPointRef x, ConstPointRef y, PointRef out) { out = yx * x + yy * y + by; };
  SaddleProblem fused = generic;
  fused.isotropic = IsotropicGradient{xx, xy, yx, yy, bx, by};
  Point z0(10);
  z0 << center(set_x), center(set_y);
  const auto a = solve_saddle(generic, Harmonic{}, 1e-300, 500, z0);
  const auto b = solve_saddle(fused, Harmonic{}, 1e-300, 500, z0);
  EXPECT_LE((a.z - b.z).norm(), 1e-12);
  EXPECT_NEAR(a.fw_gap, b.fw_gap, 1e-12);
}

TEST(RateConstants, DecoupledHasNuOne) {
  const auto c = saddle_rate_constants(2, 2, 1, 0, 0, 1, 1, 0.5, 0.5);
  EXPECT_DOUBLE_EQ(c.nu, 1.0);
  EXPECT_DOUBLE_EQ(c.C, 4.0);
  EXPECT_TRUE(c.adaptive_applicable);
}

TEST(RateConstants, WorkedExample) {
  const auto c = saddle_rate_constants(2, 2, 1, 0.1, 0.1, 1, 1, 0.5, 0.5);
  const double sigma_mu = std::sqrt(std::min(1 * 0.25, 1 * 0.25));
  const double nu = 1.0 - std::sqrt(2.0) / sigma_mu * std::max(2 * 0.1 / 1.0, 2 * 0.1 / 1.0);
  const double C = (1 * 4 + 1 * 4) / 2.0;
  EXPECT_DOUBLE_EQ(c.sigma_mu, 0.5);
  EXPECT_NEAR(c.nu, 0.434, 1e-3);
  EXPECT_DOUBLE_EQ(c.nu, nu);
  EXPECT_DOUBLE_EQ(c.C, C);
  EXPECT_DOUBLE_EQ(c.rho, nu * nu * 0.25 / (2 * C));
}

TEST(RateConstants, StrongCouplingFallsBackToHarmonic) {
  const auto c = saddle_rate_constants(2, 2, 1, 5, 5, 1, 1, 0.1, 0.1);
  EXPECT_LE(c.nu, 0.0);
  EXPECT_FALSE(c.adaptive_applicable);
  EXPECT_TRUE(std::holds_alternative<Harmonic>(select_rule(c)));
}

TEST(RateConstants, RejectsNonpositiveInputs) {
  EXPECT_THROW(saddle_rate_constants(0, 1, 1, 0, 0, 1, 1, 1, 1), std::invalid_argument);
  EXPECT_THROW(saddle_rate_constants(1, 1, 1, -1, 0, 1, 1, 1, 1), std::invalid_argument);
  EXPECT_THROW(saddle_rate_constants(1, 1, 1, 0, 0, 1, 1, 0, 1), std::invalid_argument);
}

TEST(QuadraticSaddle, ErrorVanishesAtSaddleAndIsPositiveElsewhere) {
  const auto q = fixture::interior_instance();
  const Point z = q.saddle_point();
  EXPECT_NEAR(q.error(z), 0.0, 1e-14);
  EXPECT_GT(q.error(vec({1, 1, 0, 0})), 0.0);
  const auto res = solve_saddle(q.problem(), select_rule(q.constants(fixture::border_distance(z))), 1e-13,
                                100000, vec({1, 1, 0, 0}));
  EXPECT_TRUE(res.converged);
  EXPECT_LE((res.z - z).norm(), 1e-6);
}
