#include <benchmark/benchmark.h>

#include <cmath>

#include "sgflow/driver.hpp"
#include "sgflow/elliptic.hpp"
#include "sgflow/norms.hpp"
#include "sgflow/operators.hpp"
#include "sgflow/transport.hpp"

using namespace sgflow;

namespace {

SolverConfig config_for(int n) {
  SolverConfig c = parse_config_text("nu: 0.1\nT: 0\n");
  c.grid.n_r = c.grid.n_theta = n;
  c.initial.h3_norm = 0.1;
  c.initial.swirl = 1.0;
  return c;
}

void BM_TransportStep(benchmark::State& state) {
  const auto c = config_for(static_cast<int>(state.range(0)));
  const auto g = make_grid(c);
  const auto u = configured_initial_data(c, g);
  const auto q = unfiltered_vorticity(u);
  const auto cutoff = cutoff_field(c.n, g);
  const VelocityWindow window{{0.0, 0.01}, {u, u}};
  for (auto _ : state) benchmark::DoNotOptimize(advance_q(q, window, cutoff, c.nu, 0.0, 0.01).q);
  state.SetComplexityN(static_cast<int64_t>(g->size()));
}
BENCHMARK(BM_TransportStep)->RangeMultiplier(2)->Range(32, 256)->Complexity()->Unit(benchmark::kMillisecond);

void BM_PoissonSolve(benchmark::State& state) {
  const auto c = config_for(static_cast<int>(state.range(0)));
  const auto g = make_grid(c);
  const EllipticSolver solver(g);
  const auto q = unfiltered_vorticity(configured_initial_data(c, g));
  for (auto _ : state) benchmark::DoNotOptimize(solver.solve_poisson(q).field);
  state.SetComplexityN(static_cast<int64_t>(g->size()));
}
BENCHMARK(BM_PoissonSolve)->RangeMultiplier(2)->Range(32, 256)->Complexity()->Unit(benchmark::kMillisecond);

void BM_ModifiedStokesSolve(benchmark::State& state) {
  const auto c = config_for(static_cast<int>(state.range(0)));
  const auto g = make_grid(c);
  const EllipticSolver solver(g);
  const auto psi = solver.solve_poisson(unfiltered_vorticity(configured_initial_data(c, g))).field;
  for (auto _ : state) benchmark::DoNotOptimize(solver.solve_modified_stokes(psi).field);
  state.SetComplexityN(static_cast<int64_t>(g->size()));
}
BENCHMARK(BM_ModifiedStokesSolve)->RangeMultiplier(2)->Range(32, 256)->Complexity()->Unit(benchmark::kMillisecond);

void BM_SolverFactorization(benchmark::State& state) {
  const auto g = PolarGrid::build(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)), 20.0, 20.0);
  for (auto _ : state) {
    const EllipticSolver solver(g);
    benchmark::DoNotOptimize(&solver);
  }
}
BENCHMARK(BM_SolverFactorization)->RangeMultiplier(2)->Range(32, 256)->Unit(benchmark::kMillisecond);

void BM_DerivativeTableH3(benchmark::State& state) {
  const auto c = config_for(static_cast<int>(state.range(0)));
  const auto g = make_grid(c);
  const auto u = configured_initial_data(c, g);
  for (auto _ : state) benchmark::DoNotOptimize(derivative_table(u.u1(), 3));
  state.SetComplexityN(static_cast<int64_t>(g->size()));
}
BENCHMARK(BM_DerivativeTableH3)->RangeMultiplier(2)->Range(32, 256)->Complexity()->Unit(benchmark::kMillisecond);

void BM_PicardWindow(benchmark::State& state) {
  const auto c = config_for(static_cast<int>(state.range(0)));
  const auto g = make_grid(c);
  const EllipticSolver solver(g, c.tol.elliptic_tol);
  const FixedPointContext ctx{&solver, cutoff_field(c.n, g), c.nu,
                              TransportOptions{2, c.tol.support_threshold, 4.0, false}};
  const auto u0 = configured_initial_data(c, g);
  const auto q0 = unfiltered_vorticity(u0);
  const auto p = compute_window_params(u0, q0, c.n, c.C_T, c.tol.support_threshold, c.default_window);
  const auto times = window_times(0.0, p.T0, c.dt);
  for (auto _ : state)
    benchmark::DoNotOptimize(picard_window(u0, q0, times, ctx, c.tol.picard_tol, c.tol.picard_max_iters));
}
BENCHMARK(BM_PicardWindow)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
