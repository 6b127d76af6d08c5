#pragma once

#include <functional>
#include <span>
#include <vector>

#include "sgflow/config.hpp"
#include "sgflow/elliptic.hpp"
#include "sgflow/grid.hpp"
#include "sgflow/transport.hpp"

namespace sgflow {

struct InitialDataSpec {
  double amplitude = 1.0;
  double inner_radius = 1.0;
  double outer_radius = 3.0;
  int angular_mode = 0;
  double swirl = 0.0;  // weight of an added axisymmetric profile
};

// phi0 = A (r - a)^4 (b - r)^4 (cos(m theta) + swirl) on [a, b]. For a = 1 the first interior ring is
// adjusted so the one-sided wall derivative of phi0 vanishes exactly (an O(h^4) change).
ScalarField initial_stream(const GridPtr& grid, const InitialDataSpec& spec);
VectorField build_initial_data(const GridPtr& grid, const InitialDataSpec& spec);
// perp_grad(cutoff_n * phi0); requires u0 to carry its stream function.
VectorField truncate_initial_data(const VectorField& u0, double n,
                                  CutoffProfile profile = CutoffProfile::quintic);

struct FixedPointParams {
  double M = 0.0;
  double T0 = 0.0;
  double R = 0.0;
  double C_T = 1.0;
  double q_norm = 0.0;  // ||q0||_L1 + ||q0||_L2
  double u_h3 = 0.0;
  bool degenerate = false;
};

// M = max(4 C_T R |q|, |u|_H3), T0 = min(R / M, |q|^2 / M^2); zero data gives default_window.
FixedPointParams window_params_from_norms(double R, double q_norm, double u_h3, double C_T,
                                          double default_window);
FixedPointParams compute_window_params(const VectorField& u0, const ScalarField& q0, double n,
                                       double C_T, double support_threshold_rel,
                                       double default_window);

// max(8, ceil(h / dt)) equal slices; the last time is exactly t0 + h.
std::vector<double> window_times(double t0, double h, double dt_config);

struct FlowState {
  double t = 0.0;
  VectorField u;
  ScalarField q;
  ScalarField psi;
};

struct FixedPointContext {
  const EllipticSolver* solver = nullptr;
  ScalarField cutoff;
  double nu = 0.0;
  TransportOptions transport;
};

struct WindowSolution {
  VelocityWindow u;  // one slice per window time, each carrying its stream function
  std::vector<ScalarField> q;
  std::vector<ScalarField> psi;
  std::vector<TransportStepReport> transport;
  double max_elliptic_residual = 0.0;
};

// Transport with the frozen guess, then Poisson and modified Stokes on every slice.
WindowSolution apply_F(const VelocityWindow& u_guess, const ScalarField& q_start,
                       const FixedPointContext& ctx);

struct PicardResult {
  WindowSolution solution;
  int iterations = 0;
  double contraction_estimate = 0.0;
  std::vector<double> differences;  // sup over slices of ||u^{k+1} - u^k||_H1
  double initial_identity_error = 0.0;  // ||u~(t0) - u_start||_H1 of the accepted iterate
};

PicardResult picard_window(const VectorField& u_start, const ScalarField& q_start,
                           std::span<const double> times, const FixedPointContext& ctx,
                           double picard_tol, int max_iters);

struct StepRecord {
  int step = 0;
  int window = 0;
  double t = 0.0;
  double dt = 0.0;
  double energy = 0.0;         // (||u||^2 + ||grad u||^2) / 2
  double u_l2_sq = 0.0;
  double grad_u_sq = 0.0;
  double cutoff_term = 0.0;    // integral of (1 - cutoff) |u|^2
  // Same two norms through the stream function with the compact Laplacian L:
  // ||u||^2 = -<phi, L phi>, ||grad u||^2 = ||L phi||^2 (zero when u has no stream).
  double stream_l2_sq = 0.0;
  double stream_grad_sq = 0.0;
  double u_h1 = 0.0;
  double u_h3 = 0.0;
  double u_linf = 0.0;
  double q_l1 = 0.0;
  double q_l2 = 0.0;
  double q_h1 = 0.0;
  double q_min = 0.0;
  double q_max = 0.0;
  double support_diameter = 0.0;
  double support_outer_radius = 0.0;
  double max_displacement = 0.0;
  double elliptic_residual = 0.0;
};

struct WindowRecord {
  int index = 0;
  double t_start = 0.0;
  double h = 0.0;
  int slices = 0;
  FixedPointParams params;
  int iterations = 0;
  double contraction_estimate = 0.0;
  std::vector<double> differences;
  double identity_error = 0.0;
  double max_elliptic_residual = 0.0;
  double sup_h3 = 0.0;
  double wall_seconds = 0.0;
};

struct Trajectory {
  SolverConfig config;
  GridPtr grid;
  ScalarField cutoff;
  double initial_support_radius = 0.0;
  std::vector<FlowState> states;
  std::vector<StepRecord> steps;
  std::vector<WindowRecord> windows;
};

class RunObserver {
 public:
  virtual ~RunObserver() = default;
  virtual void on_state(const FlowState&) {}
  virtual void on_step(const StepRecord&) {}
  virtual void on_window(const WindowRecord&) {}
};

GridPtr make_grid(const SolverConfig& cfg);
// Initial data as configured, truncated by the cutoff at scale cfg.n.
VectorField configured_initial_data(const SolverConfig& cfg, const GridPtr& grid);

StepRecord measure_step(const VectorField& u, const ScalarField& q, const ScalarField& cutoff,
                        double support_threshold_rel);

Trajectory run(const SolverConfig& cfg, RunObserver* observer = nullptr);
// As run, from the supplied initial velocity (which should carry its stream function).
Trajectory run_from(const SolverConfig& cfg, const GridPtr& grid, const VectorField& u0,
                    RunObserver* observer = nullptr);

struct FamilyReport {
  std::vector<double> n_list;
  double L = 0.0;
  std::vector<double> pair_differences;  // sup_t ||u^{n_{k+1}} - u^{n_k}||_H1(r < L)
  std::vector<double> initial_differences;
  std::vector<double> sup_h3;
  double h3_variation = 0.0;  // (max - min) / min of sup_h3
  bool single_run = false;
  bool strictly_decreasing = false;
};

FamilyReport run_cutoff_family(const SolverConfig& base, const std::vector<double>& n_list,
                               const std::function<RunObserver*(double)>& observer_for = {});

}  // namespace sgflow
