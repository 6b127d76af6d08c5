#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sgflow/cutoff.hpp"
#include "sgflow/errors.hpp"
#include "sgflow/norms.hpp"
#include "sgflow/operators.hpp"
#include "sgflow/transport.hpp"

using namespace sgflow;

namespace {

VectorField polar_velocity(const GridPtr& g, double (*ur)(double, double), double (*ut)(double, double)) {
  VectorField u(g);
  for (int i = 0; i < g->n_r(); ++i)
    for (int j = 0; j < g->n_theta(); ++j) {
      const double r = g->r(i), th = g->theta(j), a = ur(r, th), b = ut(r, th);
      u.u1()(i, j) = std::cos(th) * a - std::sin(th) * b;
      u.u2()(i, j) = std::sin(th) * a + std::cos(th) * b;
    }
  return u;
}

double swirl(double r, double) { return (r - 1.0) * std::exp(-(r - 3.0) * (r - 3.0)); }
double zero(double, double) { return 0.0; }
double wavy_radial(double r, double th) {
  return 0.5 * (r - 1.0) * (r - 1.0) * std::exp(-0.5 * (r - 3.0) * (r - 3.0)) * std::cos(th);
}

VelocityWindow steady(const VectorField& u, double t0, double t1) { return {{t0, t1}, {u, u}}; }

}  // namespace

TEST(Transport, ZeroVelocityLeavesNodesFixed) {
  const auto g = PolarGrid::build(32, 32, 20.0, 20.0);
  const auto map = trace_characteristics(steady(VectorField(g), 0.0, 1.0), 0.5, 0.0, 4);
  for (int i = 0; i < g->n_r(); ++i)
    for (int j = 0; j < g->n_theta(); ++j) {
      EXPECT_EQ(map.departure[g->index(i, j)].x, i);
      EXPECT_EQ(map.departure[g->index(i, j)].y, j);
    }
  EXPECT_EQ(map.max_displacement, 0.0);
}

TEST(Transport, RigidSwirlRotatesAtConstantRadius) {
  const auto g = PolarGrid::build(64, 64, 20.0, 20.0);
  const auto u = polar_velocity(g, zero, swirl);
  const double dt = 0.05;
  for (int order : {2, 4}) {
    const auto map = trace_characteristics(steady(u, 0.0, 1.0), dt, 0.0, order);
    for (int i = 1; i < g->n_r() - 1; ++i) {
      const double r = g->r(i);
      const double expected = -swirl(r, 0.0) * dt / r / g->dtheta();
      for (int j = 0; j < g->n_theta(); j += 7) {
        const auto p = map.departure[g->index(i, j)];
        EXPECT_NEAR(p.x, i, 1e-12);
        EXPECT_NEAR(p.y - j, expected, 1e-10);
      }
    }
  }
}

TEST(Transport, ForwardBackwardTraceReturnsAtIntegratorOrder) {
  const auto g = PolarGrid::build(64, 64, 20.0, 20.0);
  const auto u = polar_velocity(g, wavy_radial, swirl);
  const auto window = steady(u, 0.0, 1.0);
  std::vector<GridPoint> start;
  for (int i = 8; i < 40; i += 5)
    for (int j = 0; j < 64; j += 9) start.push_back({static_cast<double>(i), static_cast<double>(j)});
  for (int order : {2, 4}) {
    std::vector<double> err;
    for (double dt : {0.4, 0.2, 0.1}) {
      const auto back = trace_points(window, start, dt, 0.0, order);
      const auto fwd = trace_points(window, back, 0.0, dt, order);
      double e = 0.0;
      for (std::size_t k = 0; k < start.size(); ++k)
        e = std::max(e, std::hypot(fwd[k].x - start[k].x, fwd[k].y - start[k].y));
      err.push_back(e);
    }
    // One step of an order-p method is locally O(dt^{p+1}).
    EXPECT_GT(oracle::observed_order(err[1], err[2]), order + 0.5) << "order " << order;
  }
}

TEST(Transport, ZeroVelocityDampingIsExact) {
  const auto g = PolarGrid::build(32, 32, 20.0, 20.0);
  const auto q0 = ScalarField::sample(g, [](double r, double th) {
    return std::exp(-(r - 3.0) * (r - 3.0)) * (1.0 + std::cos(th));
  });
  const auto cutoff = cutoff_field(8.0, g);
  const double nu = 0.7, dt = 0.01;
  const auto window = steady(VectorField(g), 0.0, 1.0);
  ScalarField q = q0;
  for (int k = 0; k < 100; ++k) q = advance_q(q, window, cutoff, nu, k * dt, dt).q;
  const double f = std::exp(-nu * 1.0);
  for (std::size_t k = 0; k < g->size(); ++k) EXPECT_NEAR(q[k], f * q0[k], 1e-12);
}

TEST(Transport, MollifiedStepWithZeroVelocityIsExactDamping) {
  const auto g = PolarGrid::build(32, 32, 20.0, 20.0);
  const auto q0 = ScalarField::sample(g, [](double r, double) { return std::exp(-(r - 3.0) * (r - 3.0)); });
  const Mollifier m(g, 1.0);
  const auto res = mollified_advance_q(q0, steady(VectorField(g), 0.0, 1.0), cutoff_field(8.0, g),
                                       0.5, 0.0, 0.1, m);
  for (std::size_t k = 0; k < g->size(); ++k) EXPECT_NEAR(res.q[k], std::exp(-0.05) * q0[k], 1e-14);
}

TEST(Transport, MollifiedStepAgreesWithCharacteristicsUnderRefinement) {
  const auto g = PolarGrid::build(128, 128, 20.0, 20.0);
  const auto u = polar_velocity(g, wavy_radial, swirl);
  const auto q0 = ScalarField::sample(g, [](double r, double th) {
    return std::exp(-(r - 3.0) * (r - 3.0)) * (1.0 + 0.5 * std::cos(th));
  });
  const auto cutoff = cutoff_field(8.0, g);
  const VelocityWindow window = steady(u, 0.0, 1.0);
  std::vector<double> diff;
  for (auto [eps, steps] : {std::pair{0.8, 10}, {0.4, 20}, {0.2, 40}}) {
    const double dt = 0.2 / steps;
    const Mollifier m(g, eps);
    ScalarField a = q0, b = q0;
    for (int k = 0; k < steps; ++k) {
      a = advance_q(a, window, cutoff, 0.1, k * dt, dt).q;
      b = mollified_advance_q(b, window, cutoff, 0.1, k * dt, dt, m).q;
    }
    diff.push_back(sobolev_norm(a - b, SobolevOrder::l2()) / sobolev_norm(a, SobolevOrder::l2()));
  }
  // O(eps^2) + O(dt) under joint halving: at least first order.
  EXPECT_GT(diff[0] / diff[1], 2.0);
  EXPECT_GT(diff[1] / diff[2], 2.0);
}

TEST(Transport, RadialUnfilteredVorticityMatchesSymbolicBilaplacian) {
  // phi = (r - 2)^8 (3 - r)^8 on [2, 3]; q = Delta phi - Delta^2 phi. The polynomial is kept in
  // x = r - 2 so its coefficients stay small; an expanded form loses ~1e-10 to cancellation,
  // which the fourth difference amplifies past the truncation error.
  using oracle::Poly;
  const Poly px = Poly::power(Poly{{0.0, 1.0}}, 8) * Poly::power(Poly{{1.0, -1.0}}, 8);
  const Poly d1 = px.derivative(), d2 = d1.derivative(), d3 = d2.derivative(), d4 = d3.derivative();
  auto inside = [](double r) { return r > 2.0 && r < 3.0; };
  auto exact = [&](double r) {
    if (!inside(r)) return 0.0;
    const double x = r - 2.0;
    const double lap = d2(x) + d1(x) / r;
    const double bilap = d4(x) + 2.0 * d3(x) / r - d2(x) / (r * r) + d1(x) / (r * r * r);
    return lap - bilap;
  };
  for (bool with_stream : {true, false}) {
    std::vector<double> err;
    for (int n : {128, 256, 512}) {
      const auto g = PolarGrid::build(n, 16, 20.0, 20.0);
      VectorField u = perp_grad(ScalarField::sample(g, [&](double r, double) {
        return inside(r) ? std::pow((r - 2.0) * (3.0 - r), 8) : 0.0;
      }));
      if (!with_stream) u.set_stream(std::nullopt);
      const auto q = unfiltered_vorticity(u);
      const auto qe = ScalarField::sample(g, [&](double r, double) { return exact(r); });
      err.push_back(sobolev_norm(q - qe, SobolevOrder::l2()));
    }
    EXPECT_GT(oracle::observed_order(err[1], err[2]), 1.8) << "stream route " << with_stream;
  }
}

TEST(Transport, VorticityOfCompactFieldHasZeroIntegral) {
  const auto g = PolarGrid::build(128, 64, 20.0, 20.0);
  const auto u = perp_grad(ScalarField::sample(g, [](double r, double th) {
    if (r <= 2.0 || r >= 4.0) return 0.0;
    const double p = (r - 2.0) * (r - 2.0) * (4.0 - r) * (4.0 - r);
    return p * p * p * (1.0 + std::cos(th));
  }));
  const auto q = unfiltered_vorticity(u);
  EXPECT_LT(std::abs(integrate(q)), 1e-10 * sobolev_norm(q, SobolevOrder::l1()));
}

TEST(Transport, LargeDeparturesAreRejected) {
  const auto g = PolarGrid::build(32, 32, 20.0, 20.0);
  const auto u = polar_velocity(g, zero, [](double r, double) { return 5.0 * (r - 1.0); });
  const auto q = ScalarField::sample(g, [](double r, double) { return std::exp(-(r - 3.0) * (r - 3.0)); });
  EXPECT_THROW(advance_q(q, steady(u, 0.0, 10.0), cutoff_field(8.0, g), 0.1, 0.0, 5.0),
               std::invalid_argument);
}

TEST(Transport, InwardFlowAtTruncationIsSupportOverflow) {
  const auto g = PolarGrid::build(32, 32, 20.0, 20.0);
  const auto u = polar_velocity(g, [](double r, double) { return r > 10.0 ? -2.0 : 0.0; }, zero);
  EXPECT_THROW(trace_characteristics(steady(u, 0.0, 10.0), 4.0, 0.0, 2), SupportOverflowError);
}

TEST(Transport, StepReportIsFiniteAndNonnegative) {
  const auto g = PolarGrid::build(32, 32, 20.0, 20.0);
  const auto u = polar_velocity(g, wavy_radial, swirl);
  const auto q = ScalarField::sample(g, [](double r, double) { return std::exp(-(r - 3.0) * (r - 3.0)); });
  const auto res = advance_q(q, steady(u, 0.0, 1.0), cutoff_field(8.0, g), 0.1, 0.0, 0.01);
  const auto& rep = res.report;
  for (double v : {rep.l1_norm, rep.l2_norm, rep.support_diameter, rep.max_departure_displacement}) {
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GE(v, 0.0);
  }
  EXPECT_GT(rep.support_diameter, 0.0);
}
