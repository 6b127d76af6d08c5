#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "sgflow/grid.hpp"
#include "sgflow/norms.hpp"

using namespace sgflow;

TEST(Grid, RejectsInvalidShapes) {
  EXPECT_THROW(PolarGrid::build(32, 31, 20.0), std::invalid_argument);
  EXPECT_THROW(PolarGrid::build(8, 32, 20.0), std::invalid_argument);
  EXPECT_THROW(PolarGrid::build(32, 32, 6.0), std::invalid_argument);
  EXPECT_THROW(PolarGrid::build(32, 32, 20.0, 0.0), std::invalid_argument);
}

TEST(Grid, EndpointsAndMonotoneRadii) {
  const auto g = PolarGrid::build(64, 32, 20.0, 20.0);
  EXPECT_DOUBLE_EQ(g->r(0), 1.0);
  EXPECT_DOUBLE_EQ(g->r(63), 20.0);
  for (int i = 1; i < 64; ++i) EXPECT_GT(g->r(i), g->r(i - 1));
  // Stretching clusters nodes at the wall.
  EXPECT_LT(g->r(1) - g->r(0), g->r(63) - g->r(62));
  for (int i = 0; i < 64; ++i) EXPECT_NEAR(g->inverse_map(g->r(i)), i * g->dxi(), 1e-12);
}

TEST(Grid, RingBelowBracketsRadius) {
  const auto g = PolarGrid::build(64, 32, 20.0, 20.0);
  for (double r : {1.0, 1.3, 2.0, 7.7, 19.9}) {
    const int i = g->ring_below(r);
    EXPECT_LE(g->r(i), r);
    if (i + 1 < g->n_r()) EXPECT_GT(g->r(i + 1), r);
  }
}

TEST(Grid, QuadratureMatchesAnnulusAreaAtSecondOrder) {
  const double exact = std::numbers::pi * (20.0 * 20.0 - 1.0);
  double prev = 0.0;
  for (int n : {64, 128, 256}) {
    const auto g = PolarGrid::build(n, 16, 20.0, 20.0);
    const auto one = ScalarField::sample(g, [](double, double) { return 1.0; });
    const double err = std::abs(integrate(one) - exact);
    if (prev > 0.0) EXPECT_GT(oracle::observed_order(prev, err), 1.8);
    prev = err;
  }
}

TEST(Grid, QuadratureMatchesGaussKronrod) {
  auto f = [](double r) { return std::exp(-(r - 4.0) * (r - 4.0)); };
  const double ref = oracle::radial_integral(f, 20.0);
  const auto g = PolarGrid::build(256, 16, 20.0, 20.0);
  const auto q = ScalarField::sample(g, [&](double r, double) { return f(r); });
  EXPECT_NEAR(integrate(q), ref, 1e-4 * ref);
}

TEST(Grid, AngularTransformRoundTripAndCoefficients) {
  const auto g = PolarGrid::build(16, 32, 10.0);
  const auto f = ScalarField::sample(g, [](double r, double th) { return r + std::cos(3.0 * th); });
  Spectrum s;
  g->angular().forward(f.values(), s);
  EXPECT_NEAR(s.at(5, 0).real(), g->r(5), 1e-13);
  EXPECT_NEAR(s.at(5, 3).real(), 0.5, 1e-13);
  EXPECT_NEAR(std::abs(s.at(5, 2)), 0.0, 1e-13);
  ScalarField back(g);
  g->angular().inverse(s, back.values());
  for (std::size_t k = 0; k < g->size(); ++k) EXPECT_NEAR(back[k], f[k], 1e-13);
}

TEST(Grid, FieldArithmeticAndStreamCarrying) {
  const auto g = PolarGrid::build(16, 16, 10.0);
  const auto a = ScalarField::sample(g, [](double r, double) { return r; });
  const auto b = 2.0 * a - a;
  for (std::size_t k = 0; k < g->size(); ++k) EXPECT_DOUBLE_EQ(b[k], a[k]);
  VectorField u(a, a);
  u.set_stream(a);
  u *= 3.0;
  ASSERT_TRUE(u.stream().has_value());
  EXPECT_DOUBLE_EQ((*u.stream())(4, 0), 3.0 * g->r(4));
  const VectorField w = a * u;
  EXPECT_FALSE(w.stream().has_value());
}
