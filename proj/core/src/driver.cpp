#include "sgflow/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sgflow/errors.hpp"
#include "sgflow/norms.hpp"
#include "sgflow/operators.hpp"

namespace sgflow {

ScalarField initial_stream(const GridPtr& grid, const InitialDataSpec& spec) {
  const double a = spec.inner_radius, b = spec.outer_radius;
  if (!(a >= 1.0 && a < b && b < 0.5 * grid->r_max()))
    throw std::invalid_argument("initial data needs 1 <= a < b < r_max/2, got a = " +
                                std::to_string(a) + ", b = " + std::to_string(b));
  if (spec.angular_mode < 0 || spec.angular_mode >= grid->n_theta() / 2)
    throw std::invalid_argument("angular mode " + std::to_string(spec.angular_mode) +
                                " not representable on the grid");
  const int m = spec.angular_mode;
  auto phi = ScalarField::sample(grid, [&](double r, double th) {
    if (r <= a || r >= b) return 0.0;
    const double p = (r - a) * (r - a) * (b - r) * (b - r);
    return spec.amplitude * p * p * (std::cos(m * th) + spec.swirl);
  });
  // Discrete clamp: the one-sided wall derivative (-3 f0 + 4 f1 - f2) must vanish.
  for (int j = 0; j < grid->n_theta(); ++j) {
    phi(0, j) = 0.0;
    phi(1, j) = 0.25 * phi(2, j);
  }
  return phi;
}

VectorField build_initial_data(const GridPtr& grid, const InitialDataSpec& spec) {
  return perp_grad(initial_stream(grid, spec));
}

VectorField truncate_initial_data(const VectorField& u0, double n, CutoffProfile profile) {
  if (!u0.stream()) throw std::invalid_argument("truncation needs the stream function of u0");
  return perp_grad(cutoff_field(n, u0.grid_ptr(), profile) * *u0.stream());
}

FixedPointParams window_params_from_norms(double R, double q_norm, double u_h3, double C_T,
                                          double default_window) {
  if (!(C_T > 0.0)) throw std::invalid_argument("C_T must be positive");
  FixedPointParams p;
  p.R = R;
  p.C_T = C_T;
  p.q_norm = q_norm;
  p.u_h3 = u_h3;
  p.M = std::max(4.0 * C_T * R * q_norm, u_h3);
  if (p.M > 0.0 && q_norm > 0.0) {
    p.T0 = std::min(R / p.M, q_norm * q_norm / (p.M * p.M));
  } else {
    p.T0 = default_window;
    p.degenerate = true;
  }
  return p;
}

FixedPointParams compute_window_params(const VectorField& u0, const ScalarField& q0, double n,
                                       double C_T, double support_threshold_rel,
                                       double default_window) {
  const double qmax = q0.max_abs();
  const double outer = qmax > 0.0 ? support_outer_radius(q0, support_threshold_rel * qmax) : 0.0;
  const double qn = sobolev_norm(q0, SobolevOrder::l1()) + sobolev_norm(q0, SobolevOrder::l2());
  return window_params_from_norms(std::max(n, outer), qn, sobolev_norm(u0, SobolevOrder::h(3)),
                                  C_T, default_window);
}

std::vector<double> window_times(double t0, double h, double dt_config) {
  if (!(h > 0.0) || !(dt_config > 0.0))
    throw std::invalid_argument("window length and dt must be positive");
  const int k = std::max(8, static_cast<int>(std::ceil(h / dt_config - 1e-9)));
  std::vector<double> times(k + 1);
  for (int i = 0; i < k; ++i) times[i] = t0 + h * i / k;
  times[k] = t0 + h;
  return times;
}

WindowSolution apply_F(const VelocityWindow& u_guess, const ScalarField& q_start,
                       const FixedPointContext& ctx) {
  const auto& times = u_guess.times;
  const std::size_t K = times.size() - 1;
  WindowSolution sol;
  sol.u.times = times;
  sol.q.reserve(K + 1);
  sol.q.push_back(q_start);

  std::vector<ScalarField> sources;
  sources.reserve(K + 1);
  for (const auto& slice : u_guess.slices) sources.push_back(perp_div(ctx.cutoff * slice));

  for (std::size_t k = 1; k <= K; ++k) {
    auto step = advance_q_with_sources(sol.q.back(), u_guess, sources[k - 1], sources[k], ctx.nu,
                                       times[k - 1], times[k] - times[k - 1], ctx.transport);
    sol.q.push_back(std::move(step.q));
    sol.transport.push_back(step.report);
  }
  for (const auto& q : sol.q) {
    auto psi = ctx.solver->solve_poisson(q);
    auto u = ctx.solver->solve_modified_stokes(psi.field);
    sol.max_elliptic_residual =
        std::max({sol.max_elliptic_residual, psi.residual_l2, u.residual_l2});
    sol.psi.push_back(std::move(psi.field));
    sol.u.slices.push_back(std::move(u.field));
  }
  return sol;
}

PicardResult picard_window(const VectorField& u_start, const ScalarField& q_start,
                           std::span<const double> times, const FixedPointContext& ctx,
                           double picard_tol, int max_iters) {
  VelocityWindow guess;
  guess.times.assign(times.begin(), times.end());
  guess.slices.assign(times.size(), u_start);

  PicardResult res;
  double scale = -1.0;
  for (int it = 1; it <= max_iters; ++it) {
    WindowSolution sol = apply_F(guess, q_start, ctx);
    double diff = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k)
      diff = std::max(diff,
                      sobolev_norm(sol.u.slices[k] - guess.slices[k], SobolevOrder::h(1)));
    if (scale < 0.0) {
      scale = 0.0;
      for (const auto& s : sol.u.slices) scale = std::max(scale, sobolev_norm(s, SobolevOrder::h(1)));
    }
    res.differences.push_back(diff);
    res.iterations = it;
    guess = sol.u;
    res.solution = std::move(sol);
    if (diff <= picard_tol * scale) break;
    if (it == max_iters)
      throw PicardError("Picard iteration did not converge in " + std::to_string(max_iters) +
                            " iterations (last difference " + std::to_string(diff) + ")",
                        res.differences);
  }
  const auto& d = res.differences;
  if (d.size() >= 2 && d[d.size() - 2] > 0.0) res.contraction_estimate = d.back() / d[d.size() - 2];
  res.initial_identity_error =
      sobolev_norm(res.solution.u.slices.front() - u_start, SobolevOrder::h(1));
  return res;
}

GridPtr make_grid(const SolverConfig& cfg) {
  return PolarGrid::build(cfg.grid.n_r, cfg.grid.n_theta, cfg.grid.r_max, cfg.grid.stretch);
}

VectorField configured_initial_data(const SolverConfig& cfg, const GridPtr& grid) {
  const InitialDataSpec spec{cfg.initial.amplitude, cfg.initial.inner_radius,
                             cfg.initial.outer_radius, cfg.initial.angular_mode,
                             cfg.initial.swirl};
  VectorField u0 = build_initial_data(grid, spec);
  // Scaled before truncation so that runs differing only in n start from the same field.
  if (cfg.initial.h3_norm) {
    const double h3 = sobolev_norm(u0, SobolevOrder::h(3));
    if (h3 > 0.0) u0 *= *cfg.initial.h3_norm / h3;
  }
  return truncate_initial_data(u0, cfg.n, cfg.cutoff_profile);
}

StepRecord measure_step(const VectorField& u, const ScalarField& q, const ScalarField& cutoff,
                        double support_threshold_rel) {
  StepRecord rec;
  double by_order[4] = {0.0, 0.0, 0.0, 0.0};
  for (const ScalarField* c : {&u.u1(), &u.u2()}) {
    const auto table = derivative_table(*c, 3);
    for (int k = 0; k <= 3; ++k)
      for (const auto& d : table[k]) by_order[k] += inner(d, d);
  }
  rec.u_l2_sq = by_order[0];
  rec.grad_u_sq = by_order[1];
  rec.energy = 0.5 * (by_order[0] + by_order[1]);
  rec.u_h1 = std::sqrt(by_order[0] + by_order[1]);
  rec.u_h3 = std::sqrt(by_order[0] + by_order[1] + by_order[2] + by_order[3]);
  rec.u_linf = u.max_abs();

  const auto& g = u.grid();
  double ct = 0.0;
  for (int i = 0; i < g.n_r(); ++i) {
    double ring = 0.0;
    for (int j = 0; j < g.n_theta(); ++j) {
      const double a = u.u1()(i, j), b = u.u2()(i, j);
      ring += (1.0 - cutoff(i, j)) * (a * a + b * b);
    }
    ct += g.weight(i) * ring;
  }
  rec.cutoff_term = ct;
  if (u.stream()) {
    const ScalarField lap = laplacian(*u.stream());
    rec.stream_l2_sq = -inner(*u.stream(), lap);
    rec.stream_grad_sq = inner(lap, lap);
  }

  const auto tr = summarize_step(q, 0.0, support_threshold_rel);
  rec.q_l1 = tr.l1_norm;
  rec.q_l2 = tr.l2_norm;
  rec.q_h1 = sobolev_norm(q, SobolevOrder::h(1));
  rec.q_min = tr.min_value;
  rec.q_max = tr.max_value;
  rec.support_diameter = tr.support_diameter;
  rec.support_outer_radius = tr.support_outer_radius;
  return rec;
}

namespace {

ScalarField resync_vorticity(const VectorField& u) {
  ScalarField q = unfiltered_vorticity(u);
  const auto& g = q.grid();
  for (int i = g.n_r() - 2; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) q(i, j) = 0.0;
  return q;
}

}  // namespace

Trajectory run_from(const SolverConfig& cfg, const GridPtr& grid, const VectorField& u0,
                    RunObserver* observer) {
  validate(cfg);
  const EllipticSolver solver(grid, cfg.tol.elliptic_tol);
  Trajectory traj;
  traj.config = cfg;
  traj.grid = grid;
  traj.cutoff = cutoff_field(cfg.n, grid, cfg.cutoff_profile);

  FixedPointContext ctx{&solver, traj.cutoff, cfg.nu,
                        TransportOptions{cfg.integrator_order, cfg.tol.support_threshold, 4.0, false}};

  VectorField u = u0;
  ScalarField q = resync_vorticity(u);
  const double thr = cfg.tol.support_threshold;
  {
    const double qmax = q.max_abs();
    traj.initial_support_radius = qmax > 0.0 ? support_outer_radius(q, thr * qmax) : 0.0;
  }

  auto store_state = [&](double t, const VectorField& uu, const ScalarField& qq) {
    FlowState st{t, uu, qq, solver.solve_poisson(qq).field};
    if (observer) observer->on_state(st);
    traj.states.push_back(std::move(st));
  };

  double t = 0.0;
  store_state(t, u, q);
  StepRecord first = measure_step(u, q, traj.cutoff, thr);
  traj.steps.push_back(first);
  if (observer) observer->on_step(first);

  const double T = cfg.T;
  const double interval = cfg.output.snapshot_interval;
  double next_out = interval > 0.0 ? interval : T;
  int window_index = 0;
  int step_index = 0;
  const double t_eps = 1e-12 * std::max(1.0, T);

  while (t < T - t_eps) {
    const auto clock = std::chrono::steady_clock::now();
    const FixedPointParams params =
        compute_window_params(u, q, cfg.n, cfg.C_T, thr, cfg.default_window);
    double t_end = t + params.T0;
    bool output_now = false;
    if (t_end >= std::min(next_out, T) - t_eps) {
      t_end = std::min(next_out, T);
      output_now = true;
    }
    auto times = window_times(t, t_end - t, cfg.dt);
    const PicardResult pic =
        picard_window(u, q, times, ctx, cfg.tol.picard_tol, cfg.tol.picard_max_iters);
    const auto& sol = pic.solution;

    WindowRecord wrec;
    wrec.index = window_index;
    wrec.t_start = t;
    wrec.h = t_end - t;
    wrec.slices = static_cast<int>(times.size()) - 1;
    wrec.params = params;
    wrec.iterations = pic.iterations;
    wrec.contraction_estimate = pic.contraction_estimate;
    wrec.differences = pic.differences;
    wrec.identity_error = pic.initial_identity_error;
    wrec.max_elliptic_residual = sol.max_elliptic_residual;

    for (std::size_t k = 1; k < times.size(); ++k) {
      StepRecord rec = measure_step(sol.u.slices[k], sol.q[k], traj.cutoff, thr);
      rec.step = ++step_index;
      rec.window = window_index;
      rec.t = times[k];
      rec.dt = times[k] - times[k - 1];
      rec.max_displacement = sol.transport[k - 1].max_departure_displacement;
      rec.elliptic_residual = sol.max_elliptic_residual;
      wrec.sup_h3 = std::max(wrec.sup_h3, rec.u_h3);
      traj.steps.push_back(rec);
      if (observer) observer->on_step(rec);
    }

    u = sol.u.slices.back();
    q = (cfg.join_mode == JoinMode::resync) ? resync_vorticity(u) : sol.q.back();
    t = t_end;

    wrec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - clock).count();
    traj.windows.push_back(wrec);
    if (observer) observer->on_window(wrec);
    ++window_index;

    if (output_now) {
      store_state(t, u, q);
      next_out += interval > 0.0 ? interval : T;
    }
  }
  return traj;
}

Trajectory run(const SolverConfig& cfg, RunObserver* observer) {
  validate(cfg);
  const GridPtr grid = make_grid(cfg);
  return run_from(cfg, grid, configured_initial_data(cfg, grid), observer);
}

FamilyReport run_cutoff_family(const SolverConfig& base, const std::vector<double>& n_list,
                               const std::function<RunObserver*(double)>& observer_for) {
  FamilyReport rep;
  rep.n_list = n_list;
  if (n_list.empty()) throw std::invalid_argument("cutoff family needs at least one n");
  for (std::size_t k = 1; k < n_list.size(); ++k)
    if (!(n_list[k] > n_list[k - 1]))
      throw std::invalid_argument("cutoff family n_list must be strictly increasing");
  rep.L = 0.5 * n_list.front();

  std::vector<Trajectory> runs;
  for (double n : n_list) {
    SolverConfig cfg = base;
    cfg.n = n;
    runs.push_back(run(cfg, observer_for ? observer_for(n) : nullptr));
    double sup = 0.0;
    for (const auto& s : runs.back().steps) sup = std::max(sup, s.u_h3);
    rep.sup_h3.push_back(sup);
  }
  const auto [lo, hi] = std::minmax_element(rep.sup_h3.begin(), rep.sup_h3.end());
  rep.h3_variation = *lo > 0.0 ? (*hi - *lo) / *lo : 0.0;

  rep.single_run = n_list.size() < 2;
  for (std::size_t k = 1; k < runs.size(); ++k) {
    const auto& a = runs[k - 1].states;
    const auto& b = runs[k].states;
    if (a.size() != b.size())
      throw std::runtime_error("cutoff family runs stored different numbers of states");
    double sup = 0.0;
    for (std::size_t s = 0; s < a.size(); ++s) {
      if (std::abs(a[s].t - b[s].t) > 1e-12 * std::max(1.0, a[s].t))
        throw std::runtime_error("cutoff family runs are not aligned in time");
      sup = std::max(sup, sobolev_norm(b[s].u - a[s].u, SobolevOrder::h(1), rep.L));
    }
    rep.pair_differences.push_back(sup);
    rep.initial_differences.push_back(
        sobolev_norm(b.front().u - a.front().u, SobolevOrder::h(1), rep.L));
  }
  rep.strictly_decreasing = !rep.single_run;
  for (std::size_t k = 1; k < rep.pair_differences.size(); ++k)
    if (!(rep.pair_differences[k] < rep.pair_differences[k - 1])) rep.strictly_decreasing = false;
  return rep;
}

}  // namespace sgflow
