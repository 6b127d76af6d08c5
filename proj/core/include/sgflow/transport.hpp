#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "sgflow/cutoff.hpp"
#include "sgflow/grid.hpp"

namespace sgflow {

// q = perp_div(u - laplacian(u)). When u carries its stream function phi the compact route
// laplacian(phi) - laplacian(laplacian(phi)) is used, which is the operator the clamped
// stream solver inverts.
ScalarField unfiltered_vorticity(const VectorField& u);

// Velocity slices over a window, linear in time between slices.
struct VelocityWindow {
  std::vector<double> times;
  std::vector<VectorField> slices;

  double t_begin() const { return times.front(); }
  double t_end() const { return times.back(); }
  // Slice index a and weight alpha with t = (1 - alpha) t_a + alpha t_{a+1}.
  std::pair<int, double> locate(double t) const;
  VectorField at(double t) const;
};

// Position in node-index units: x = xi / dxi, y = theta / dtheta.
struct GridPoint {
  double x = 0.0;
  double y = 0.0;
};

struct CharacteristicMap {
  std::vector<GridPoint> departure;  // one per node, grid index order
  double dt = 0.0;
  int order = 2;
  int wall_clamped = 0;
  int outer_clamped = 0;
  double max_displacement = 0.0;  // physical length
};

struct TransportStepReport {
  double t = 0.0;
  double l1_norm = 0.0;
  double l2_norm = 0.0;
  double support_diameter = 0.0;
  double support_outer_radius = 0.0;
  double max_departure_displacement = 0.0;
  double min_value = 0.0;
  double max_value = 0.0;
  int wall_clamped = 0;
};

struct TransportOptions {
  int order = 2;                       // 2 (midpoint) or 4
  double support_threshold_rel = 1e-10;
  double max_cells = 4.0;  // accuracy guard on the departure distance, in node units
  bool summarize = true;   // fill the norm and support fields of the step report
};

struct TransportResult {
  ScalarField q;
  TransportStepReport report;
};

// Bicubic Lagrange weights in (x, y); periodic in y, shifted one-sided stencils at the
// radial ends, no clamping of the interpolant.
struct InterpStencil {
  int i0 = 0;
  std::array<double, 4> wx{};
  std::array<int, 4> j{};
  std::array<double, 4> wy{};
};

InterpStencil make_stencil(const PolarGrid& g, GridPoint p);
double interpolate(const ScalarField& f, const InterpStencil& s);
double sample(const ScalarField& f, double r, double theta);

// Integrates dX/dt = u(X, t) from t_from to t_to (either direction) in one RK step.
std::vector<GridPoint> trace_points(const VelocityWindow& window, std::span<const GridPoint> start,
                                    double t_from, double t_to, int order);

// Backward trace of every node from t1 to t0. Departures below r = 1 are clamped and counted;
// a departure past r_max minus one cell from a node further inside throws SupportOverflowError.
CharacteristicMap trace_characteristics(const VelocityWindow& window, double t1, double t0,
                                        int order);

// One step of q_t + u.grad q + nu q = nu perp_div(cutoff u) along characteristics with the
// exact damping factor and the trapezoid rule for the source.
TransportResult advance_q(const ScalarField& q, const VelocityWindow& window,
                          const ScalarField& cutoff, double nu, double t, double dt,
                          const TransportOptions& opts = {});

// Same step with the sources perp_div(cutoff u) at t and t + dt supplied by the caller.
TransportResult advance_q_with_sources(const ScalarField& q, const VelocityWindow& window,
                                       const ScalarField& source_t, const ScalarField& source_t1,
                                       double nu, double t, double dt,
                                       const TransportOptions& opts = {});

// Eulerian exponential-RK2 step of q_t + J[u.grad(J q)] + nu q = nu perp_div(cutoff u).
TransportResult mollified_advance_q(const ScalarField& q, const VelocityWindow& window,
                                    const ScalarField& cutoff, double nu, double t, double dt,
                                    const Mollifier& mollifier, const TransportOptions& opts = {});

TransportStepReport summarize_step(const ScalarField& q, double t, double threshold_rel);

}  // namespace sgflow
