#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sgflow/norms.hpp"
#include "sgflow/operators.hpp"

using namespace sgflow;

namespace {

// g(r) cos(2 theta) with g = exp(-(r - 4)^2); Laplacian (g'' + g'/r - 4 g / r^2) cos(2 theta).
double g0(double r) { return std::exp(-(r - 4.0) * (r - 4.0)); }
double g1(double r) { return -2.0 * (r - 4.0) * g0(r); }
double g2(double r) { return (4.0 * (r - 4.0) * (r - 4.0) - 2.0) * g0(r); }

double interior_max_error(const ScalarField& a, const ScalarField& b, double r_lo, double r_hi) {
  const auto& g = a.grid();
  double m = 0.0;
  for (int i = 0; i < g.n_r(); ++i) {
    if (g.r(i) < r_lo || g.r(i) > r_hi) continue;
    for (int j = 0; j < g.n_theta(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  }
  return m;
}

}  // namespace

TEST(Operators, LaplacianSecondOrder) {
  std::vector<double> err;
  for (int n : {64, 128, 256}) {
    const auto g = PolarGrid::build(n, 32, 20.0, 20.0);
    const auto f = ScalarField::sample(g, [](double r, double th) { return g0(r) * std::cos(2 * th); });
    const auto exact = ScalarField::sample(g, [](double r, double th) {
      return (g2(r) + g1(r) / r - 4.0 * g0(r) / (r * r)) * std::cos(2 * th);
    });
    err.push_back(interior_max_error(laplacian(f), exact, 1.0, 20.0));
  }
  EXPECT_GT(oracle::observed_order(err[0], err[1]), 1.8);
  EXPECT_GT(oracle::observed_order(err[1], err[2]), 1.8);
}

TEST(Operators, CartesianGradientOfLinearFunctionIsConstant) {
  const auto g = PolarGrid::build(128, 32, 20.0, 20.0);
  // f = x; the radial difference of r is exact only up to the map curvature, so compare at O(h^2).
  const auto f = ScalarField::sample(g, [](double r, double th) { return r * std::cos(th); });
  const auto gx = partial_x(f), gy = partial_y(f);
  double ex = 0.0, ey = 0.0;
  for (std::size_t k = 0; k < g->size(); ++k) {
    ex = std::max(ex, std::abs(gx[k] - 1.0));
    ey = std::max(ey, std::abs(gy[k]));
  }
  EXPECT_LT(ex, 5e-3);
  EXPECT_LT(ey, 5e-3);
}

TEST(Operators, PerpGradIsDiscretelyDivergenceFree) {
  const auto g = PolarGrid::build(64, 64, 20.0, 20.0);
  const auto psi = ScalarField::sample(g, [](double r, double th) {
    return g0(r) * (1.0 + std::sin(th) + 0.3 * std::cos(3 * th));
  });
  const auto u = perp_grad(psi);
  ASSERT_TRUE(u.stream().has_value());
  EXPECT_LT(div(u).max_abs(), 1e-10 * u.max_abs());
}

TEST(Operators, PerpDivOfPerpGradIsLaplacian) {
  std::vector<double> err;
  for (int n : {64, 128}) {
    const auto g = PolarGrid::build(n, 32, 20.0, 20.0);
    const auto psi = ScalarField::sample(g, [](double r, double th) { return g0(r) * std::cos(2 * th); });
    const auto exact = ScalarField::sample(g, [](double r, double th) {
      return (g2(r) + g1(r) / r - 4.0 * g0(r) / (r * r)) * std::cos(2 * th);
    });
    err.push_back(interior_max_error(perp_div(perp_grad(psi)), exact, 1.5, 15.0));
  }
  EXPECT_GT(oracle::observed_order(err[0], err[1]), 1.8);
}

TEST(Operators, ZeroFieldMapsToZero) {
  const auto g = PolarGrid::build(32, 32, 20.0);
  const ScalarField z(g);
  EXPECT_EQ(laplacian(z).max_abs(), 0.0);
  EXPECT_EQ(grad(z).max_abs(), 0.0);
  EXPECT_EQ(perp_div(VectorField(g)).max_abs(), 0.0);
}
