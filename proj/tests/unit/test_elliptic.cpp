#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "sgflow/elliptic.hpp"
#include "sgflow/errors.hpp"
#include "sgflow/norms.hpp"
#include "sgflow/operators.hpp"
#include "sgflow/validation.hpp"

using namespace sgflow;

TEST(Elliptic, PoissonRadialConvergesAtSecondOrder) {
  const auto st = poisson_radial_study({32, 64, 128}, 16);
  EXPECT_GE(st.min_order, 1.8) << st.errors[0] << " " << st.errors[1] << " " << st.errors[2];
}

TEST(Elliptic, PoissonModeOneConvergesAtSecondOrder) {
  const auto st = poisson_mode1_study({32, 64, 128}, 16);
  EXPECT_GE(st.min_order, 1.8);
}

TEST(Elliptic, ModifiedStokesConvergesAtSecondOrder) {
  const auto st = stokes_mode1_study({32, 64, 128}, 16);
  EXPECT_GE(st.min_order, 1.8);
}

TEST(Elliptic, ZeroSourceGivesZeroSolution) {
  const auto g = PolarGrid::build(32, 32, 20.0, 20.0);
  const EllipticSolver solver(g);
  const auto psi = solver.solve_poisson(ScalarField(g));
  EXPECT_EQ(psi.field.max_abs(), 0.0);
  const auto u = solver.solve_modified_stokes(ScalarField(g));
  EXPECT_EQ(u.field.max_abs(), 0.0);
}

TEST(Elliptic, PoissonWallConditionAndFarFieldFlux) {
  const auto g = PolarGrid::build(128, 32, 20.0, 20.0);
  const EllipticSolver solver(g);
  const auto q = ScalarField::sample(g, [](double r, double) {
    return r < 4.0 ? std::pow((r - 1.0) * (4.0 - r), 3) : 0.0;
  });
  const auto sol = solver.solve_poisson(q);
  for (int j = 0; j < g->n_theta(); ++j) EXPECT_NEAR(sol.field(0, j), 0.0, 1e-10 * sol.field.max_abs());
  // Outside the source psi = psi(b) + Q / (2 pi) log(r / b), so r d_r psi = Q / (2 pi).
  const double flux = poisson_far_flux(q);
  EXPECT_NEAR(flux, integrate(q) / (2.0 * std::numbers::pi), 1e-14 * std::abs(flux));
  const int i = g->ring_below(12.0);
  const double drpsi = d_radial(sol.field)(i, 0);
  EXPECT_NEAR(g->r(i) * drpsi, flux, 1e-2 * std::abs(flux));
  EXPECT_LT(sol.residual_l2, 1e-8);
}

TEST(Elliptic, PoissonRejectsSourceNearTruncation) {
  const auto g = PolarGrid::build(32, 32, 20.0, 20.0);
  const EllipticSolver solver(g);
  const auto q = ScalarField::sample(g, [](double r, double) { return r > 15.0 ? 1.0 : 0.0; });
  EXPECT_THROW(solver.solve_poisson(q), SupportOverflowError);
}

TEST(Elliptic, ModifiedStokesIsNoSlipAndDivergenceFree) {
  const auto g = PolarGrid::build(64, 32, 20.0, 20.0);
  const EllipticSolver solver(g);
  const auto psi = ScalarField::sample(g, [](double r, double th) {
    return std::exp(-(r - 3.0) * (r - 3.0)) * (std::cos(th) + 0.5 * std::sin(2 * th));
  });
  const auto sol = solver.solve_modified_stokes(psi);
  ASSERT_TRUE(sol.field.stream().has_value());
  EXPECT_LT(boundary_trace_norm(sol.field), 1e-10 * sol.field.max_abs());
  EXPECT_LT(div(sol.field).max_abs(), 1e-10 * sol.field.max_abs());
}

TEST(Elliptic, BesselLogDerivativeMatchesRecurrenceIdentity) {
  // K_m' = -K_{m-1} - (m / x) K_m.
  for (int m = 1; m <= 12; ++m)
    for (double x : {0.5, 2.0, 10.0, 30.0}) {
      const double km = std::cyl_bessel_k(m, x), km1 = std::cyl_bessel_k(m - 1, x);
      const double ref = (-km1 - m / x * km) / km;
      EXPECT_NEAR(bessel_k_log_derivative(m, x), ref, 1e-12 * std::abs(ref));
    }
  EXPECT_NEAR(bessel_k_log_derivative(0, 3.0), -std::cyl_bessel_k(1, 3.0) / std::cyl_bessel_k(0, 3.0),
              1e-14);
}

TEST(Elliptic, HarmonicKernelCheck) {
  const auto g32 = PolarGrid::build(32, 32, 20.0, 20.0);
  const auto g64 = PolarGrid::build(64, 64, 20.0, 20.0);
  const auto d32 = harmonic_kernel_check(g32, true);
  const auto d64 = harmonic_kernel_check(g64, true);
  EXPECT_GT(d32.normalized_sigma_min, 1e-6);
  EXPECT_LT(d32.normalized_sigma_min / d64.normalized_sigma_min, 10.0);
  EXPECT_GT(d64.normalized_sigma_min / d32.normalized_sigma_min, 0.1);
  // Without the outer rows the truncated annulus carries harmonic fields.
  EXPECT_LT(harmonic_kernel_check(g32, false).normalized_sigma_min, 1e-12);
}

TEST(Elliptic, ModeSystemsAreBanded) {
  const auto g = PolarGrid::build(32, 32, 20.0, 20.0);
  const EllipticSolver solver(g);
  const auto p = solver.poisson_system(1);
  EXPECT_EQ(p.matrix.n(), 32);
  EXPECT_FALSE(p.boundary_rows.empty());
  const auto s = solver.stokes_system(2);
  EXPECT_EQ(s.m, 2);
}
