#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sgflow/norms.hpp"

using namespace sgflow;

namespace {

double f0(double r) { return std::exp(-(r - 4.0) * (r - 4.0)); }
double f1(double r) { return -2.0 * (r - 4.0) * f0(r); }

}  // namespace

TEST(Norms, L1L2AgainstQuadrature) {
  const auto g = PolarGrid::build(256, 16, 20.0, 20.0);
  const auto f = ScalarField::sample(g, [](double r, double) { return -f0(r); });
  const double l1 = oracle::radial_integral(f0, 20.0);
  const double l2 = std::sqrt(oracle::radial_integral([](double r) { return f0(r) * f0(r); }, 20.0));
  EXPECT_NEAR(sobolev_norm(f, SobolevOrder::l1()), l1, 1e-4 * l1);
  EXPECT_NEAR(sobolev_norm(f, SobolevOrder::l2()), l2, 1e-4 * l2);
  EXPECT_NEAR(sobolev_norm(f, SobolevOrder::linf()), 1.0, 1e-3);
}

TEST(Norms, H1AgainstQuadrature) {
  auto sq = [](double r) { return f0(r) * f0(r) + f1(r) * f1(r); };
  const double ref = std::sqrt(oracle::radial_integral(sq, 20.0));
  double prev = 0.0;
  for (int n : {128, 256}) {
    const auto g = PolarGrid::build(n, 16, 20.0, 20.0);
    const auto f = ScalarField::sample(g, [](double r, double) { return f0(r); });
    const double err = std::abs(sobolev_norm(f, SobolevOrder::h(1)) - ref);
    if (prev > 0.0) EXPECT_GT(oracle::observed_order(prev, err), 1.7);
    prev = err;
  }
  EXPECT_LT(prev, 1e-3 * ref);
}

TEST(Norms, RestrictedNormsOnlySeeInnerRings) {
  const auto g = PolarGrid::build(64, 16, 20.0, 20.0);
  const auto f = ScalarField::sample(g, [](double r, double) { return r > 10.0 ? 1.0 : 0.0; });
  EXPECT_EQ(sobolev_norm(f, SobolevOrder::l2(), 9.0), 0.0);
  EXPECT_GT(sobolev_norm(f, SobolevOrder::l2()), 0.0);
}

TEST(Norms, DerivativeTableShapeAndOrderGuard) {
  const auto g = PolarGrid::build(32, 16, 20.0);
  const auto f = ScalarField::sample(g, [](double r, double th) { return f0(r) * std::cos(th); });
  const auto t = derivative_table(f, 3);
  ASSERT_EQ(t.size(), 4u);
  for (int k = 0; k <= 3; ++k) EXPECT_EQ(t[k].size(), static_cast<std::size_t>(k + 1));
  EXPECT_THROW(derivative_table(f, 6), std::invalid_argument);
  EXPECT_THROW(sobolev_norm(f, SobolevOrder::h(-1)), std::invalid_argument);
}

TEST(Norms, SeminormOfConstantGradientField) {
  const auto g = PolarGrid::build(64, 32, 20.0, 20.0);
  // Zero field has zero norms of every order.
  const ScalarField z(g);
  for (int s = 0; s <= 5; ++s) EXPECT_EQ(sobolev_seminorm(z, s), 0.0);
}

TEST(Norms, SupportDiameterMatchesBruteForce) {
  const auto g = PolarGrid::build(48, 48, 20.0, 20.0);
  const auto q = ScalarField::sample(g, [](double r, double th) {
    const double x = r * std::cos(th) - 2.5, y = r * std::sin(th) - 1.0;
    return (x * x + 2.0 * y * y < 2.0) ? 1.0 : 0.0;
  });
  double brute = 0.0;
  for (int i = 0; i < g->n_r(); ++i)
    for (int j = 0; j < g->n_theta(); ++j) {
      if (q(i, j) == 0.0) continue;
      for (int k = 0; k < g->n_r(); ++k)
        for (int l = 0; l < g->n_theta(); ++l) {
          if (q(k, l) == 0.0) continue;
          const double dx = g->r(i) * g->cos_theta(j) - g->r(k) * g->cos_theta(l);
          const double dy = g->r(i) * g->sin_theta(j) - g->r(k) * g->sin_theta(l);
          brute = std::max(brute, std::hypot(dx, dy));
        }
    }
  ASSERT_GT(brute, 0.0);
  EXPECT_NEAR(support_diameter(q, 0.5), brute, 1e-12);
  EXPECT_THROW(support_diameter(q, 0.0), std::invalid_argument);
}

TEST(Norms, SupportOfRingIsItsOuterDiameter) {
  const auto g = PolarGrid::build(64, 64, 20.0, 20.0);
  const auto q = ScalarField::sample(g, [](double r, double) { return (r > 2.0 && r < 3.0) ? 1.0 : 0.0; });
  const int outer = g->ring_below(3.0);
  EXPECT_NEAR(support_diameter(q, 0.5), 2.0 * g->r(outer), 1e-12);
  EXPECT_DOUBLE_EQ(support_outer_radius(q, 0.5), g->r(outer));
}
