#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "mclab/ball.hpp"
#include "mclab/families.hpp"
#include "mclab/grid.hpp"

using namespace mclab;

namespace {

GridFunction from(const Domain& d, auto fn) {
  std::vector<double> v(d.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(d.point(d.unflat(i)));
  return GridFunction(d, v);
}

}  // namespace

TEST(Domain, SpacingAndCoordinates) {
  const Domain d = Domain::make(1, 64, 4.0, 0.5);
  EXPECT_DOUBLE_EQ(d.spacing(), 0.125);
  EXPECT_DOUBLE_EQ(d.coordinate(0), -4.0 + 0.0625);
  EXPECT_DOUBLE_EQ(d.coordinate(63), 4.0 - 0.0625);
  EXPECT_DOUBLE_EQ(d.points_per_axis() * d.spacing(), 2.0 * d.half_width());
}

TEST(Domain, RejectsBadParameters) {
  auto constraint = [](auto fn) {
    try {
      fn();
    } catch (const ValidationError& e) {
      return e.constraint();
    }
    return std::string("none");
  };
  EXPECT_EQ(constraint([] { Domain::make(3, 64, 4.0, 0.5); }), "grid_dim");
  EXPECT_EQ(constraint([] { Domain::make(1, 15, 4.0, 0.5); }), "grid_points");
  EXPECT_EQ(constraint([] { Domain::make(1, 8, 4.0, 0.5); }), "grid_points");
  EXPECT_EQ(constraint([] { Domain::make(1, 64, 4.0, 0.25); }), "support_margin");  // 4h = 0.5
  EXPECT_EQ(constraint([] { Domain::make(1, 64, 4.0, 4.0); }), "support_margin");
}

TEST(Ball, InteriorCountsAtTwoH) {
  const Domain d1 = Domain::make(1, 64, 4.0, 0.5);
  EXPECT_EQ(ball_members(d1, {32, 0}, 2 * d1.spacing()).member_indices.size(), 5u);
  const Domain d2 = Domain::make(2, 32, 4.0, 1.0);
  const Ball b = ball_members(d2, {16, 16}, 2 * d2.spacing());
  EXPECT_EQ(b.member_indices.size(), 13u);
  EXPECT_EQ(b.lattice_count, 13u);
  EXPECT_TRUE(b.contains({16, 16}));
}

TEST(Ball, CornerIsClipped) {
  const Domain d = Domain::make(2, 32, 4.0, 1.0);
  const Ball b = ball_members(d, {0, 0}, 2 * d.spacing());
  EXPECT_EQ(b.member_indices.size(), 6u);  // offsets with o0, o1 ≥ 0 and o0² + o1² ≤ 4
  EXPECT_LT(b.member_indices.size(), b.lattice_count);
}

TEST(Ball, RadiusFloor) {
  const Domain d = Domain::make(1, 64, 4.0, 0.5);
  EXPECT_THROW(ball_members(d, {10, 0}, 1.5 * d.spacing()), ValidationError);
}

TEST(Ball, Nested) {
  const Domain d = Domain::make(2, 32, 4.0, 1.0);
  for (double r1 : {0.5, 0.7, 1.1})
    for (double r2 : {1.2, 1.9}) {
      const Ball a = ball_members(d, {5, 9}, r1), b = ball_members(d, {5, 9}, r2);
      for (const auto& y : a.member_indices) EXPECT_TRUE(b.contains(y));
    }
}

TEST(BallAverage, Oracles) {
  const std::vector<double> v{0.0, 0.0, 1.0};
  EXPECT_DOUBLE_EQ(ball_average(v, 1.0), 1.0 / 3.0);
  const std::vector<double> w{3.0, 4.0};
  EXPECT_NEAR(ball_average(w, 2.0), std::sqrt(25.0 / 2.0), 1e-15);
  const std::vector<double> c(7, -2.5);
  for (double q : {1.0, 2.0, 3.5}) EXPECT_NEAR(ball_average(c, q), 2.5, 1e-14);
}

TEST(BallAverage, ZeroExtensionDividesByLatticeCount) {
  const Domain d = Domain::make(1, 16, 4.0, 2.0);
  const GridFunction one(d, std::vector<double>(d.size(), 1.0));
  const Ball b = ball_members(d, {0, 0}, 2 * d.spacing());
  EXPECT_NEAR(ball_average(one.values, d, b, 1.0), 3.0 / 5.0, 1e-15);
}

TEST(LpNorm, ClosedForms) {
  const Domain d = Domain::make(2, 32, 4.0, 1.0);
  const std::vector<double> c(d.size(), 1.5);
  EXPECT_NEAR(lp_norm(c, 2.0, d), 1.5 * std::pow(8.0, 2.0 / 2.0), 1e-12);
  std::vector<double> spike(d.size(), 0.0);
  spike[77] = 3.0;
  EXPECT_NEAR(lp_norm(spike, 3.0, d), 3.0 * std::pow(d.cell_volume(), 1.0 / 3.0), 1e-14);
  EXPECT_EQ(lp_norm(std::vector<double>(d.size(), 0.0), 2.0, d), 0.0);
}

TEST(Derivative, OrderZeroIsAbsoluteValue) {
  const Domain d = Domain::make(1, 64, 4.0, 0.5);
  const GridFunction u = from(d, [](const Point& x) { return std::abs(x[0]) < 2 ? -std::sin(x[0]) : 0.0; });
  const DerivativeField f = derivative_field(u, 0);
  for (std::size_t i = 0; i < u.values.size(); ++i) EXPECT_EQ(f.magnitudes[i], std::abs(u.values[i]));
}

TEST(Derivative, ExactOnLinearInterior) {
  const Domain d = Domain::make(1, 128, 4.0, 0.5);
  const GridFunction u = from(d, [](const Point& x) { return 3.0 * x[0] - 1.0; });
  const DerivativeField f = derivative_field(u, 1);
  for (int i = 5; i < 123; ++i) EXPECT_NEAR(f.magnitudes[i], 3.0, 1e-10);
}

TEST(Derivative, ExactOnQuadraticIn2D) {
  const Domain d = Domain::make(2, 32, 4.0, 1.0);
  const GridFunction u = from(d, [](const Point& x) { return x[0] * x[1]; });
  const DerivativeField f = derivative_field(u, 2);
  // ∂01 = 1, others 0; magnitude sqrt(2!/(1!1!)·1) = √2.
  EXPECT_NEAR(f.magnitudes[d.flat({16, 16})], std::sqrt(2.0), 1e-10);
}

TEST(Derivative, SecondOrderConvergence) {
  double err[2];
  for (int t = 0; t < 2; ++t) {
    const Domain d = Domain::make(1, t == 0 ? 256 : 512, 4.0, 0.5);
    CorpusFamily f;
    f.kind = FamilyKind::modulated_bump;
    f.center = {0.0};
    f.width = 0.8;
    f.wavevector = {1.0};
    f.phase = -std::numbers::pi / 2;  // sin(x)·envelope
    const GridFunction u = sample(d, f);
    const DerivativeField g = derivative_field(u, 2);
    const Index x0 = d.nearest({0.3, 0.0});
    const double x = d.point(x0)[0], w = 0.8;
    const double env = std::exp(-x * x / (2 * w * w));
    const double de = -x / (w * w) * env, dde = (x * x / (w * w) - 1.0) / (w * w) * env;
    const double exact = std::abs(dde * std::sin(x) + 2.0 * de * std::cos(x) - env * std::sin(x));
    err[t] = std::abs(g.magnitudes[d.flat(x0)] - exact);
  }
  EXPECT_LT(err[1], err[0] / 3.0);
}

TEST(Shift, CommutesWithDerivativesAndNorms) {
  const Domain d = Domain::make(2, 64, 4.0, 0.5);
  CorpusFamily f;
  f.kind = FamilyKind::gaussian_bump;
  f.center = {0.2, -0.3};
  f.width = 0.6;
  const GridFunction u = sample(d, f);
  const GridFunction v = shifted(u, {3, -2});
  EXPECT_NEAR(lp_norm(v.values, 2.0, d), lp_norm(u.values, 2.0, d), 1e-12);
  const auto du = derivative_field(u, 1), dv = derivative_field(v, 1);
  EXPECT_EQ(du.magnitudes[d.flat({30, 30})], dv.magnitudes[d.flat({33, 28})]);
  EXPECT_THROW(shifted(u, {40, 0}), ValidationError);
}

TEST(Dump, RoundTrip) {
  const Domain d = Domain::make(1, 64, 4.0, 0.5);
  const GridFunction u = from(d, [](const Point& x) { return std::abs(x[0]) < 1 ? std::cos(x[0]) / 3.0 : 0.0; });
  std::istringstream is(dump_string(u));
  const GridFunction v = read_dump(is);
  EXPECT_EQ(v.domain, u.domain);
  EXPECT_EQ(v.values, u.values);
}

TEST(Sampling, FamilyOracles) {
  const Domain d = Domain::make(1, 256, 4.0, 0.5);
  CorpusFamily g;
  g.kind = FamilyKind::gaussian_bump;
  g.center = {0.0};
  g.width = 0.5;
  g.amplitude = 2.0;
  // Cell centres sit at ±h/2; evaluate at the one nearest x = w.
  const GridFunction u = sample(d, g);
  const Index at = d.nearest({0.5, 0.0});
  const double x = d.point(at)[0];
  EXPECT_NEAR(u.at(at), 2.0 * std::exp(-x * x / 0.5) * profile::cutoff(x / 1.5), 1e-15);
  EXPECT_TRUE(u.vanishes_on_margin());

  CorpusFamily z;
  z.kind = FamilyKind::zero;
  z.center = {0.0};
  for (double v : sample(d, z).values) EXPECT_EQ(v, 0.0);

  CorpusFamily far = g;
  far.center = {3.0};
  try {
    sample(d, far);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.constraint(), "support_margin");
  }
}

TEST(Sampling, ConcentrationPeakIsWidthIndependent) {
  const Domain d = Domain::make(1, 512, 4.0, 0.5);
  for (double w : {0.5, 0.25, 0.125}) {
    CorpusFamily f;
    f.kind = FamilyKind::concentration;
    f.center = {0.0};
    f.width = w;
    const GridFunction u = sample(d, f);
    EXPECT_DOUBLE_EQ(sup_norm(u.values), 1.0);
  }
}
