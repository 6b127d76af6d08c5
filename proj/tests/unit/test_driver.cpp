#include <gtest/gtest.h>

#include <cmath>

#include "sgflow/driver.hpp"
#include "sgflow/errors.hpp"
#include "sgflow/norms.hpp"
#include "sgflow/operators.hpp"

using namespace sgflow;

namespace {

SolverConfig small_config(double T) {
  SolverConfig c = parse_config_text("nu: 0.1\nT: 0\n");
  c.T = T;
  c.grid = {32, 32, 20.0, 20.0};
  c.initial.h3_norm = 0.1;
  c.initial.swirl = 1.0;
  c.output.snapshot_interval = 0.01;
  return c;
}

}  // namespace

TEST(Driver, WindowParametersFollowTheClosedForm) {
  // R = 2, |q| = 0.5, |u|_H3 = 1: M = max(4 * 2 * 0.5, 1) = 4, T0 = min(2/4, 0.25/16).
  const auto p = window_params_from_norms(2.0, 0.5, 1.0, 1.0, 0.01);
  EXPECT_DOUBLE_EQ(p.M, 4.0);
  EXPECT_DOUBLE_EQ(p.T0, 0.015625);
  EXPECT_FALSE(p.degenerate);
  // The H3 branch of M.
  const auto h = window_params_from_norms(2.0, 0.5, 10.0, 1.0, 0.01);
  EXPECT_DOUBLE_EQ(h.M, 10.0);
  EXPECT_DOUBLE_EQ(h.T0, 0.0025);
  // A larger support radius never lengthens the window.
  double prev = p.T0;
  for (double R : {4.0, 8.0, 16.0}) {
    const double T0 = window_params_from_norms(R, 0.5, 1.0, 1.0, 0.01).T0;
    EXPECT_LE(T0, prev);
    prev = T0;
  }
  const auto z = window_params_from_norms(2.0, 0.0, 0.0, 1.0, 0.01);
  EXPECT_TRUE(z.degenerate);
  EXPECT_EQ(z.T0, 0.01);
  EXPECT_THROW(window_params_from_norms(2.0, 0.5, 1.0, 0.0, 0.01), std::invalid_argument);
}

TEST(Driver, WindowTimesAreUniformAndEndExactly) {
  const auto a = window_times(0.3, 0.1, 1.0);
  ASSERT_EQ(a.size(), 9u);
  EXPECT_EQ(a.front(), 0.3);
  EXPECT_EQ(a.back(), 0.3 + 0.1);
  for (std::size_t k = 1; k < a.size(); ++k) EXPECT_NEAR(a[k] - a[k - 1], 0.1 / 8, 1e-15);
  EXPECT_EQ(window_times(0.0, 0.1, 0.001).size(), 101u);
  EXPECT_THROW(window_times(0.0, 0.0, 0.1), std::invalid_argument);
}

TEST(Driver, InitialDataIsClampedDivergenceFreeAndCompact) {
  const auto g = PolarGrid::build(64, 32, 20.0, 20.0);
  const InitialDataSpec spec{1.0, 1.0, 3.0, 1, 0.5};
  const auto phi = initial_stream(g, spec);
  for (int j = 0; j < g->n_theta(); ++j) {
    EXPECT_EQ(phi(0, j), 0.0);
    EXPECT_EQ(-3.0 * phi(0, j) + 4.0 * phi(1, j) - phi(2, j), 0.0);
  }
  const int out = g->ring_below(3.0) + 1;
  for (int i = out; i < g->n_r(); ++i) EXPECT_EQ(phi(i, 5), 0.0);
  const auto u = build_initial_data(g, spec);
  EXPECT_LT(div(u).max_abs(), 1e-10 * u.max_abs());
  EXPECT_LT(boundary_trace_norm(u), 1e-12);
  EXPECT_THROW(initial_stream(g, {1.0, 1.0, 12.0, 1, 0.0}), std::invalid_argument);
  EXPECT_THROW(initial_stream(g, {1.0, 1.0, 3.0, 16, 0.0}), std::invalid_argument);
}

TEST(Driver, TruncationKeepsFieldInsideHalfCutoff) {
  const auto g = PolarGrid::build(64, 32, 20.0, 20.0);
  const auto u0 = build_initial_data(g, {1.0, 1.0, 6.0, 1, 0.0});
  const auto un = truncate_initial_data(u0, 8.0);
  const int inner = g->ring_below(4.0) - 2;
  for (int i = 0; i <= inner; ++i)
    for (int j = 0; j < g->n_theta(); ++j) EXPECT_NEAR(un.u1()(i, j), u0.u1()(i, j), 1e-12);
  VectorField bare = u0;
  bare.set_stream(std::nullopt);
  EXPECT_THROW(truncate_initial_data(bare, 8.0), std::invalid_argument);
}

TEST(Driver, ConfiguredInitialDataHasRequestedH3NormBeforeTruncation) {
  SolverConfig c = small_config(0.0);
  c.grid = {64, 64, 20.0, 20.0};
  c.initial.h3_norm = 0.25;
  c.n = 9.0;  // plateau r < 4.5 covers the support r < 3, so truncation is the identity
  const auto g = make_grid(c);
  const auto u = configured_initial_data(c, g);
  EXPECT_NEAR(sobolev_norm(u, SobolevOrder::h(3)), 0.25, 1e-12);
}

TEST(Driver, ZeroDataStaysZero) {
  SolverConfig c = small_config(0.02);
  c.initial.amplitude = 0.0;
  c.initial.h3_norm.reset();
  const auto traj = run(c);
  ASSERT_FALSE(traj.windows.empty());
  for (const auto& w : traj.windows) {
    EXPECT_TRUE(w.params.degenerate);
    EXPECT_EQ(w.iterations, 1);
  }
  for (const auto& s : traj.states) {
    EXPECT_EQ(s.u.max_abs(), 0.0);
    EXPECT_EQ(s.q.max_abs(), 0.0);
  }
  EXPECT_NEAR(traj.states.back().t, 0.02, 1e-15);
}

TEST(Driver, ZeroFinalTimeStoresOnlyTheInitialState) {
  const auto traj = run(small_config(0.0));
  EXPECT_EQ(traj.states.size(), 1u);
  EXPECT_EQ(traj.steps.size(), 1u);
  EXPECT_TRUE(traj.windows.empty());
  EXPECT_GT(traj.steps[0].energy, 0.0);
}

TEST(Driver, PicardContractsOnSmallData) {
  SolverConfig c = small_config(0.0);
  const auto g = make_grid(c);
  const EllipticSolver solver(g, c.tol.elliptic_tol);
  const auto cutoff = cutoff_field(c.n, g);
  const FixedPointContext ctx{&solver, cutoff, c.nu, {}};
  const auto u0 = configured_initial_data(c, g);
  const auto q0 = unfiltered_vorticity(u0);
  const auto params = compute_window_params(u0, q0, c.n, c.C_T, c.tol.support_threshold, 0.01);
  const auto times = window_times(0.0, params.T0, c.dt);
  const auto pic = picard_window(u0, q0, times, ctx, 1e-10, 10);
  ASSERT_GE(pic.differences.size(), 2u);
  EXPECT_LT(pic.contraction_estimate, 0.5);
  for (std::size_t k = 1; k < pic.differences.size(); ++k)
    EXPECT_LT(pic.differences[k], pic.differences[k - 1]);
  EXPECT_THROW(picard_window(u0, q0, times, ctx, 1e-30, 2), PicardError);
}

TEST(Driver, RunsAreDeterministicAndLogEveryStep) {
  const auto c = small_config(0.02);
  const auto a = run(c);
  const auto b = run(c);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t k = 0; k < a.steps.size(); ++k) {
    EXPECT_EQ(a.steps[k].energy, b.steps[k].energy);
    EXPECT_EQ(a.steps[k].q_l2, b.steps[k].q_l2);
    EXPECT_EQ(a.steps[k].step, static_cast<int>(k));
  }
  ASSERT_EQ(a.states.size(), 3u);
  EXPECT_NEAR(a.states[1].t, 0.01, 1e-15);
  EXPECT_NEAR(a.states[2].t, 0.02, 1e-15);
  // Viscous decay of the energy.
  EXPECT_LT(a.steps.back().energy, a.steps.front().energy);
}

TEST(Driver, FamilyRejectsUnorderedCutoffs) {
  const auto c = small_config(0.0);
  EXPECT_THROW(run_cutoff_family(c, {}), std::invalid_argument);
  EXPECT_THROW(run_cutoff_family(c, {4.0, 4.0}), std::invalid_argument);
  const auto rep = run_cutoff_family(c, {4.0});
  EXPECT_TRUE(rep.single_run);
  EXPECT_FALSE(rep.strictly_decreasing);
}
