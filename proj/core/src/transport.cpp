#include "sgflow/transport.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

#include "sgflow/errors.hpp"
#include "sgflow/norms.hpp"
#include "sgflow/operators.hpp"

namespace sgflow {

ScalarField unfiltered_vorticity(const VectorField& u) {
  if (u.stream()) {
    const ScalarField lap = laplacian(*u.stream());
    return lap - laplacian(lap);
  }
  return perp_div(u - laplacian(u));
}

std::pair<int, double> VelocityWindow::locate(double t) const {
  if (times.empty()) throw std::logic_error("empty velocity window");
  const double span = times.back() - times.front();
  const double slack = 1e-12 * std::max(1.0, std::abs(span));
  if (t < times.front() - slack || t > times.back() + slack)
    throw std::out_of_range("time " + std::to_string(t) + " outside the velocity window");
  if (times.size() == 1) return {0, 0.0};
  auto it = std::upper_bound(times.begin(), times.end(), t);
  int a = static_cast<int>(it - times.begin()) - 1;
  a = std::clamp(a, 0, static_cast<int>(times.size()) - 2);
  const double alpha = (t - times[a]) / (times[a + 1] - times[a]);
  return {a, std::clamp(alpha, 0.0, 1.0)};
}

VectorField VelocityWindow::at(double t) const {
  const auto [a, alpha] = locate(t);
  if (alpha == 0.0) return slices[a];
  if (alpha == 1.0) return slices[a + 1];
  VectorField out = (1.0 - alpha) * slices[a];
  out += alpha * slices[a + 1];
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::array<double, 4> lagrange4(double t) {
  return {-t * (t - 1.0) * (t - 2.0) / 6.0, (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
          -(t + 1.0) * t * (t - 2.0) / 2.0, (t + 1.0) * t * (t - 1.0) / 6.0};
}

}  // namespace

InterpStencil make_stencil(const PolarGrid& g, GridPoint p) {
  InterpStencil s;
  const int nr = g.n_r();
  const int nt = g.n_theta();
  int i = static_cast<int>(std::floor(p.x));
  i = std::clamp(i, 1, nr - 3);
  s.i0 = i - 1;
  s.wx = lagrange4(p.x - i);
  double yw = p.y;
  if (yw < 0.0 || yw >= nt) yw -= nt * std::floor(yw / nt);
  int j = static_cast<int>(yw);
  if (j >= nt) j = nt - 1;  // yw rounded up to nt
  s.wy = lagrange4(yw - j);
  if (j >= 1 && j + 2 < nt) {
    for (int k = 0; k < 4; ++k) s.j[k] = j - 1 + k;
  } else {
    for (int k = 0; k < 4; ++k) s.j[k] = ((j - 1 + k) % nt + nt) % nt;
  }
  return s;
}

double interpolate(const ScalarField& f, const InterpStencil& s) {
  const auto& g = f.grid();
  double acc = 0.0;
  for (int a = 0; a < 4; ++a) {
    if (s.wx[a] == 0.0) continue;
    const double* row = f.values().data() + g.index(s.i0 + a, 0);
    double ring = 0.0;
    for (int b = 0; b < 4; ++b) ring += s.wy[b] * row[s.j[b]];
    acc += s.wx[a] * ring;
  }
  return acc;
}

double sample(const ScalarField& f, double r, double theta) {
  const auto& g = f.grid();
  return interpolate(f, make_stencil(g, {g.inverse_map(r) / g.dxi(), theta / g.dtheta()}));
}

namespace {

struct IndexVelocity {
  double dx, dy;
};

// Index-space velocity (dx/dt, dy/dt in grid cells). Slices are converted once, and the time
// blend is formed once per distinct evaluation time, so each evaluation is one spatial stencil.
class VelocityEvaluator {
 public:
  VelocityEvaluator(const VelocityWindow& w)
      : w_(w), g_(w.slices.front().grid()), slices_(w.slices.size()) {}

  IndexVelocity operator()(GridPoint p, double t) const {
    const auto& f = at(t);
    const InterpStencil s = make_stencil(g_, p);
    return {interpolate(f.first, s), interpolate(f.second, s)};
  }

 private:
  using Pair = std::pair<ScalarField, ScalarField>;

  const Pair& at(double t) const {
    for (const auto& [tc, f] : blends_)
      if (tc == t) return f;
    const auto [a, alpha] = w_.locate(t);
    Pair f = slice(a);
    if (alpha != 0.0) {
      const auto& b = slice(a + 1);
      f.first *= 1.0 - alpha;
      f.second *= 1.0 - alpha;
      f.first += alpha * b.first;
      f.second += alpha * b.second;
    }
    blends_.emplace_back(t, std::move(f));
    return blends_.back().second;
  }

  const Pair& slice(int a) const {
    auto& c = slices_[a];
    if (!c) {
      const auto& u = w_.slices[a];
      ScalarField vx(u.u1().grid_ptr()), vy(u.u1().grid_ptr());
      for (int i = 0; i < g_.n_r(); ++i) {
        const double sx = 1.0 / (g_.jac(i) * g_.dxi());
        const double sy = 1.0 / (g_.r(i) * g_.dtheta());
        for (int j = 0; j < g_.n_theta(); ++j) {
          const double cs = g_.cos_theta(j), sn = g_.sin_theta(j);
          const double u1 = u.u1()(i, j), u2 = u.u2()(i, j);
          vx(i, j) = (cs * u1 + sn * u2) * sx;
          vy(i, j) = (-sn * u1 + cs * u2) * sy;
        }
      }
      c.emplace(std::move(vx), std::move(vy));
    }
    return *c;
  }

  const VelocityWindow& w_;
  const PolarGrid& g_;
  mutable std::vector<std::optional<Pair>> slices_;
  mutable std::deque<std::pair<double, Pair>> blends_;
};

GridPoint step_point(const VelocityEvaluator& v, GridPoint p, double t, double h, int order) {
  auto add = [](GridPoint q, IndexVelocity k, double s) { return GridPoint{q.x + s * k.dx, q.y + s * k.dy}; };
  if (order == 4) {
    const auto k1 = v(p, t);
    const auto k2 = v(add(p, k1, 0.5 * h), t + 0.5 * h);
    const auto k3 = v(add(p, k2, 0.5 * h), t + 0.5 * h);
    const auto k4 = v(add(p, k3, h), t + h);
    return {p.x + h / 6.0 * (k1.dx + 2 * k2.dx + 2 * k3.dx + k4.dx),
            p.y + h / 6.0 * (k1.dy + 2 * k2.dy + 2 * k3.dy + k4.dy)};
  }
  const auto k1 = v(p, t);
  const auto k2 = v(add(p, k1, 0.5 * h), t + 0.5 * h);
  return add(p, k2, h);
}

double physical_distance(const PolarGrid& g, int i, int j, GridPoint b) {
  const double ra = g.r(i), rb = g.map(b.x * g.dxi());
  const double dth = (j - b.y) * g.dtheta();
  return std::sqrt(std::max(0.0, ra * ra + rb * rb - 2.0 * ra * rb * std::cos(dth)));
}

}  // namespace

std::vector<GridPoint> trace_points(const VelocityWindow& window, std::span<const GridPoint> start,
                                    double t_from, double t_to, int order) {
  if (order != 2 && order != 4) throw std::invalid_argument("integrator order must be 2 or 4");
  const VelocityEvaluator v(window);
  std::vector<GridPoint> out(start.size());
  const double h = t_to - t_from;
  for (std::size_t k = 0; k < start.size(); ++k) out[k] = step_point(v, start[k], t_from, h, order);
  return out;
}

CharacteristicMap trace_characteristics(const VelocityWindow& window, double t1, double t0,
                                        int order) {
  if (!(t0 <= t1)) throw std::invalid_argument("trace requires t0 <= t1");
  if (order != 2 && order != 4) throw std::invalid_argument("integrator order must be 2 or 4");
  const auto& g = window.slices.front().grid();
  const int nr = g.n_r(), nt = g.n_theta();
  CharacteristicMap map;
  map.dt = t1 - t0;
  map.order = order;
  map.departure.resize(g.size());
  const VelocityEvaluator v(window);
  const double x_outer = nr - 2;
  for (int i = 0; i < nr; ++i) {
    for (int j = 0; j < nt; ++j) {
      const GridPoint arrival{static_cast<double>(i), static_cast<double>(j)};
      GridPoint d = arrival;
      if (map.dt > 0.0) d = step_point(v, arrival, t1, -map.dt, order);
      if (d.x < 0.0) {
        d.x = 0.0;
        ++map.wall_clamped;
      }
      if (d.x > x_outer) {
        if (i < nr - 2)
          throw SupportOverflowError("support reached truncation boundary (departure at r = " +
                                     std::to_string(g.map(d.x * g.dxi())) + ")");
        if (d.x > nr - 1) {
          d.x = nr - 1;
          ++map.outer_clamped;
        }
      }
      map.departure[g.index(i, j)] = d;
      map.max_displacement = std::max(map.max_displacement, physical_distance(g, i, j, d));
    }
  }
  return map;
}

TransportStepReport summarize_step(const ScalarField& q, double t, double threshold_rel) {
  TransportStepReport rep;
  rep.t = t;
  rep.l1_norm = sobolev_norm(q, SobolevOrder::l1());
  rep.l2_norm = sobolev_norm(q, SobolevOrder::l2());
  const double m = q.max_abs();
  if (m > 0.0) {
    const double thr = threshold_rel * m;
    rep.support_diameter = support_diameter(q, thr);
    rep.support_outer_radius = support_outer_radius(q, thr);
  }
  const auto v = q.values();
  rep.min_value = *std::min_element(v.begin(), v.end());
  rep.max_value = *std::max_element(v.begin(), v.end());
  return rep;
}

TransportResult advance_q_with_sources(const ScalarField& q, const VelocityWindow& window,
                                       const ScalarField& source_t, const ScalarField& source_t1,
                                       double nu, double t, double dt,
                                       const TransportOptions& opts) {
  if (!(dt > 0.0)) throw std::invalid_argument("transport step requires dt > 0");
  if (!source_t.all_finite() || !source_t1.all_finite())
    throw std::runtime_error("non-finite cutoff source in transport step");
  const auto& g = q.grid();
  const auto map = trace_characteristics(window, t + dt, t, opts.order);
  const double decay = std::exp(-nu * dt);
  ScalarField out(q.grid_ptr());
  const auto& d = map.departure;
  for (int i = 0; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const GridPoint p = d[g.index(i, j)];
      if (std::abs(p.x - i) > opts.max_cells || std::abs(p.y - j) > opts.max_cells)
        throw std::invalid_argument("departure point more than " + std::to_string(opts.max_cells) +
                                    " cells from its node; reduce dt");
    }
  for (std::size_t k = 0; k < g.size(); ++k) {
    const GridPoint p = d[k];
    double qd, sd;
    if (p.x == std::floor(p.x) && p.y == std::floor(p.y) && p.y >= 0.0 && p.y < g.n_theta()) {
      const auto idx = g.index(static_cast<int>(p.x), static_cast<int>(p.y));
      qd = q[idx];
      sd = source_t[idx];
    } else {
      const InterpStencil s = make_stencil(g, p);
      qd = interpolate(q, s);
      sd = interpolate(source_t, s);
    }
    out[k] = decay * qd + 0.5 * nu * dt * (decay * sd + source_t1[k]);
  }
  TransportStepReport report;
  report.t = t + dt;
  if (opts.summarize) report = summarize_step(out, t + dt, opts.support_threshold_rel);
  report.max_departure_displacement = map.max_displacement;
  report.wall_clamped = map.wall_clamped;
  return {std::move(out), report};
}

TransportResult advance_q(const ScalarField& q, const VelocityWindow& window,
                          const ScalarField& cutoff, double nu, double t, double dt,
                          const TransportOptions& opts) {
  const ScalarField s0 = perp_div(cutoff * window.at(t));
  const ScalarField s1 = perp_div(cutoff * window.at(t + dt));
  return advance_q_with_sources(q, window, s0, s1, nu, t, dt, opts);
}

TransportResult mollified_advance_q(const ScalarField& q, const VelocityWindow& window,
                                    const ScalarField& cutoff, double nu, double t, double dt,
                                    const Mollifier& mollifier, const TransportOptions& opts) {
  if (!(dt > 0.0)) throw std::invalid_argument("transport step requires dt > 0");
  const VectorField u0 = window.at(t);
  const VectorField u1 = window.at(t + dt);
  const ScalarField s0 = perp_div(cutoff * u0);
  const ScalarField s1 = perp_div(cutoff * u1);
  if (!s0.all_finite() || !s1.all_finite())
    throw std::runtime_error("non-finite cutoff source in transport step");

  auto rhs = [&](const ScalarField& f, const VectorField& u, const ScalarField& s) {
    const VectorField gj = grad(mollifier.apply(f));
    ScalarField adv = u.u1() * gj.u1();
    adv += u.u2() * gj.u2();
    ScalarField out = nu * s;
    out -= mollifier.apply(adv);
    return out;
  };

  const double decay = std::exp(-nu * dt);
  const ScalarField n0 = rhs(q, u0, s0);
  ScalarField stage = q + dt * n0;
  stage *= decay;
  const ScalarField n1 = rhs(stage, u1, s1);
  ScalarField out = q + (0.5 * dt) * n0;
  out *= decay;
  out += (0.5 * dt) * n1;

  auto report = summarize_step(out, t + dt, opts.support_threshold_rel);
  report.max_departure_displacement = std::max(u0.max_abs(), u1.max_abs()) * dt;
  return {std::move(out), report};
}

}  // namespace sgflow
