#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mclab/polyfit.hpp"

using namespace mclab;

namespace {

std::vector<Point> line(std::size_t n) {
  std::vector<Point> z;
  for (std::size_t i = 0; i < n; ++i) z.push_back({-1.0 + 2.0 * i / (n - 1), 0.0});
  return z;
}

}  // namespace

TEST(PolyBasis, Sizes) {
  for (int dim : {1, 2})
    for (int deg = -1; deg <= 3; ++deg)
      EXPECT_EQ(PolyBasis::make(dim, deg).size(), PolyBasis::expected_size(dim, deg));
  EXPECT_EQ(PolyBasis::make(2, 2).size(), 6u);
  EXPECT_THROW(PolyBasis::make(2, 4), ValidationError);
}

TEST(Fit, MedianOnThreePoints) {
  const auto z = line(3);
  const std::vector<double> v{0.0, 0.0, 1.0};
  const FitResult r = fit_polynomial(z, v, PolyBasis::make(1, 0), 1);
  EXPECT_EQ(r.coefficients[0], 0.0);
  EXPECT_EQ(r.residual, 1.0 / 3.0);
  // Scanning every data value as the constant confirms the median is optimal.
  for (double c : v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x - c);
    EXPECT_GE(s / 3.0, r.residual);
  }
}

TEST(Fit, MeanOnThreePoints) {
  const auto z = line(3);
  const std::vector<double> v{0.0, 0.0, 1.0};
  const FitResult r = fit_polynomial(z, v, PolyBasis::make(1, 0), 2);
  EXPECT_NEAR(r.coefficients[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.residual, std::sqrt(2.0 / 9.0), 1e-15);
}

TEST(Fit, EmptyBasisIsPlainAverage) {
  const auto z = line(4);
  const std::vector<double> v{1.0, -2.0, 0.0, 3.0};
  EXPECT_DOUBLE_EQ(fit_polynomial(z, v, PolyBasis::make(1, -1), 1).residual, 1.5);
  EXPECT_DOUBLE_EQ(fit_polynomial(z, v, PolyBasis::make(1, -1), 2).residual, std::sqrt(14.0 / 4.0));
}

TEST(Fit, ReproducesPolynomials) {
  std::vector<Point> z;
  for (int a = -3; a <= 3; ++a)
    for (int b = -3; b <= 3; ++b)
      if (a * a + b * b <= 9) z.push_back({a / 3.0, b / 3.0});
  for (int deg = 0; deg <= 2; ++deg) {
    std::vector<double> v;
    for (const auto& p : z) v.push_back(0.7 - 1.3 * p[0] * (deg >= 1) + 0.4 * p[0] * p[1] * (deg >= 2));
    for (int q : {1, 2}) EXPECT_LE(fit_polynomial(z, v, PolyBasis::make(2, deg), q).residual, 1e-9);
  }
}

TEST(Fit, InfeasibleAndBadExponent) {
  const auto z = line(2);
  const std::vector<double> v{1.0, 2.0};
  EXPECT_THROW(fit_polynomial(z, v, PolyBasis::make(1, 2), 2), ValidationError);
  EXPECT_THROW(fit_polynomial(z, v, PolyBasis::make(1, 0), 3), ValidationError);
}

TEST(Fit, RandomDataProperties) {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    const auto z = line(15);
    std::vector<double> v;
    for (const auto& p : z) v.push_back(std::sin(3 * p[0]) + 0.1 * g(gen));
    const double avg1 = fit_polynomial(z, v, PolyBasis::make(1, -1), 1).residual;
    double prev = avg1;
    for (int deg = 0; deg <= 2; ++deg) {
      const FitResult l1 = fit_polynomial(z, v, PolyBasis::make(1, deg), 1);
      const FitResult l2 = fit_polynomial(z, v, PolyBasis::make(1, deg), 2);
      EXPECT_LE(l1.residual, prev + 1e-7);  // degree monotonicity
      EXPECT_LE(l1.residual, avg1 + 1e-9);  // zero polynomial is feasible
      double l2_l1 = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) {
        double p = 0.0, zi = 1.0;
        for (double c : l2.coefficients) p += c * zi, zi *= z[i][0];
        l2_l1 += std::abs(v[i] - p);
      }
      EXPECT_LE(l1.residual, l2_l1 / z.size() + 1e-9);
      prev = l1.residual;
    }
  }
}

TEST(Fit, ResidualIgnoresCoordinateScale) {
  const auto z = line(9);
  std::vector<Point> z2;
  for (const auto& p : z) z2.push_back({0.5 * p[0], 0.0});
  std::vector<double> v;
  for (const auto& p : z) v.push_back(std::exp(p[0]));
  for (int q : {1, 2}) {
    const double a = fit_polynomial(z, v, PolyBasis::make(1, 1), q).residual;
    const double b = fit_polynomial(z2, v, PolyBasis::make(1, 1), q).residual;
    EXPECT_NEAR(a, b, 1e-9 * std::max(1.0, a));
  }
}

TEST(ValueMultiset, OscillationOracle) {
  ValueMultiset m;
  m.push_nonzero(1.0);
  m.finalize(3);  // {0, 0, 1}
  EXPECT_NEAR(m.double_average_oscillation(), 4.0 / 9.0, 1e-15);
  EXPECT_EQ(m.median(), 0.0);
  EXPECT_NEAR(m.mean_abs_deviation(0.0), 1.0 / 3.0, 1e-15);
  ValueMultiset c;
  for (int i = 0; i < 5; ++i) c.push_nonzero(2.0);
  c.finalize(5);
  EXPECT_EQ(c.double_average_oscillation(), 0.0);
}
