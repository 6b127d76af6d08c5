#include "sgflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

#include "sgflow/norms.hpp"
#include "sgflow/operators.hpp"

namespace sgflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kOrthogonalRel = 1e-10;

// Running trapezoid integral of y over the step times.
std::vector<double> cumulative_trapezoid(const std::vector<StepRecord>& steps,
                                         double (*y)(const StepRecord&)) {
  std::vector<double> out(steps.size(), 0.0);
  for (std::size_t k = 1; k < steps.size(); ++k)
    out[k] = out[k - 1] + 0.5 * (steps[k].t - steps[k - 1].t) * (y(steps[k]) + y(steps[k - 1]));
  return out;
}

void require_steps(const Trajectory& traj) {
  if (traj.steps.empty()) throw std::invalid_argument("trajectory has no step records");
}

// Smallest C >= 0 with C exp(C a) >= y, for a >= 0, y >= 0.
double solve_c_exp(double y, double a) {
  if (y <= 0.0) return 0.0;
  if (a == 0.0) return y;
  double lo = 0.0, hi = std::max(1.0, y);
  while (hi * std::exp(hi * a) < y) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mid * std::exp(mid * a) < y ? lo : hi) = mid;
  }
  return hi;
}

double smooth_step(double x) {
  auto f = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return f(x) / (f(x) + f(1.0 - x));
}

double smooth_step_dot(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  auto f = [](double s) { return std::exp(-1.0 / s); };
  auto fd = [&](double s) { return f(s) / (s * s); };
  const double a = f(x), b = f(1.0 - x);
  return (fd(x) * b + a * fd(1.0 - x)) / ((a + b) * (a + b));
}

double bump(double s) { return std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0; }

double grad_inner(const VectorField& u, const VectorField& w) {
  const VectorField a1 = grad(u.u1()), a2 = grad(u.u2());
  const VectorField b1 = grad(w.u1()), b2 = grad(w.u2());
  return inner(a1, b1) + inner(a2, b2);
}

}  // namespace

double EstimateReport::metric(const std::string& key) const {
  for (const auto& [k, v] : metrics)
    if (k == key) return v;
  throw std::out_of_range("report " + name + " has no metric " + key);
}

EstimateReport check_q_lp(const Trajectory& traj, int p) {
  if (p != 1 && p != 2) throw std::invalid_argument("check_q_lp supports p = 1 or 2");
  require_steps(traj);
  const auto& st = traj.steps;
  const double nu = traj.config.nu;
  EstimateReport rep;
  rep.name = p == 1 ? "q_L1" : "q_L2";
  const auto integral = cumulative_trapezoid(
      st, p == 1 ? +[](const StepRecord& s) { return s.u_h1; }
                 : +[](const StepRecord& s) { return s.u_h1 * s.u_h1; });
  auto qp = [p](const StepRecord& s) { return p == 1 ? s.q_l1 : s.q_l2 * s.q_l2; };
  const double q0 = qp(st.front());

  double c = 0.0;
  bool all_zero = true;
  for (std::size_t k = 0; k < st.size(); ++k) {
    const double lhs = qp(st[k]);
    if (lhs != 0.0 || st[k].u_h1 != 0.0) all_zero = false;
    if (lhs > q0) {
      const double denom = nu * integral[k];
      c = std::max(c, denom > 0.0 ? (lhs - q0) / denom : kInf);
    }
  }
  for (std::size_t k = 0; k < st.size(); ++k) {
    rep.t.push_back(st[k].t);
    rep.lhs.push_back(qp(st[k]));
    rep.rhs.push_back(std::isfinite(c) ? q0 + c * nu * integral[k] : kInf);
  }
  rep.measured_constant = c;
  rep.degenerate = all_zero;
  rep.passed = std::isfinite(c);
  rep.metrics = {{"q0_p", q0}, {"final_ratio", q0 > 0.0 ? rep.lhs.back() / q0 : 0.0}};
  return rep;
}

EstimateReport check_support(const Trajectory& traj) {
  require_steps(traj);
  const auto& st = traj.steps;
  const auto& g = *traj.grid;
  EstimateReport rep;
  rep.name = "support";
  const auto travel = cumulative_trapezoid(st, +[](const StepRecord& s) { return s.u_linf; });
  const double base = std::max(traj.initial_support_radius, traj.config.n);
  double worst = 0.0, min_slack = kInf;
  bool all_zero = true;
  for (std::size_t k = 0; k < st.size(); ++k) {
    const double reach = std::min(base + travel[k], g.r_max());
    const int ring = std::clamp(g.ring_below(reach), 0, g.n_r() - 1);
    const double bound = base + travel[k] + g.cell_width(ring);
    const double lhs = st[k].support_outer_radius;
    if (lhs != 0.0) all_zero = false;
    rep.t.push_back(st[k].t);
    rep.lhs.push_back(lhs);
    rep.rhs.push_back(bound);
    worst = std::max(worst, lhs / bound);
    min_slack = std::min(min_slack, bound - lhs);
  }
  rep.measured_constant = worst;
  rep.degenerate = all_zero;
  rep.passed = min_slack >= 0.0;
  const double r0 = st.front().support_outer_radius;
  double drift = 0.0;
  for (double r : rep.lhs) drift = std::max(drift, std::abs(r - r0));
  rep.metrics = {{"min_slack", min_slack}, {"radius_drift", drift}, {"base_radius", base}};
  return rep;
}

EstimateReport check_hs_transport(const Trajectory& traj, int s) {
  if (s < 0 || s + 2 > PolarGrid::kMaxSobolevOrder)
    throw std::invalid_argument("insufficient smoothness budget for H^" + std::to_string(s) +
                                " transport check (needs H^" + std::to_string(s + 2) + ")");
  std::vector<double> t, q_hs, u_hs, u_hs2;
  if (s == 1) {
    require_steps(traj);
    for (const auto& r : traj.steps) {
      t.push_back(r.t);
      q_hs.push_back(r.q_h1);
      u_hs.push_back(r.u_h1);
      u_hs2.push_back(r.u_h3);
    }
  } else {
    if (traj.states.empty()) throw std::invalid_argument("trajectory has no stored states");
    for (const auto& st : traj.states) {
      t.push_back(st.t);
      q_hs.push_back(sobolev_norm(st.q, SobolevOrder::h(s)));
      u_hs.push_back(sobolev_norm(st.u, SobolevOrder::h(s)));
      u_hs2.push_back(sobolev_norm(st.u, SobolevOrder::h(s + 2)));
    }
  }
  const double horizon = t.back() - t.front();
  const double a_sup = *std::max_element(u_hs.begin(), u_hs.end());
  const double b_sup = *std::max_element(u_hs2.begin(), u_hs2.end());
  const double base = q_hs.front() + std::sqrt(traj.config.nu * horizon) * a_sup;

  EstimateReport rep;
  rep.name = "q_H" + std::to_string(s) + "_transport";
  double c = 0.0;
  bool all_zero = base == 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (q_hs[k] != 0.0) all_zero = false;
    if (q_hs[k] == 0.0) continue;
    c = std::max(c, base > 0.0 ? solve_c_exp(q_hs[k] / base, (t[k] - t.front()) * b_sup) : kInf);
  }
  for (std::size_t k = 0; k < t.size(); ++k) {
    rep.t.push_back(t[k]);
    rep.lhs.push_back(q_hs[k]);
    rep.rhs.push_back(c * base * std::exp(c * (t[k] - t.front()) * b_sup));
  }
  rep.measured_constant = c;
  rep.degenerate = all_zero;
  rep.passed = std::isfinite(c);
  rep.metrics = {{"base", base}, {"sup_u_hs", a_sup}, {"sup_u_hs2", b_sup}};
  return rep;
}

EstimateReport check_energy(const Trajectory& traj, double residual_tol) {
  require_steps(traj);
  const auto& st = traj.steps;
  const double nu = traj.config.nu;
  bool use_stream = false;
  for (const auto& r : st) use_stream = use_stream || r.stream_l2_sq > 0.0 || r.stream_grad_sq > 0.0;

  auto energy = [&](const StepRecord& r, bool stream) {
    return stream ? 0.5 * (r.stream_l2_sq + r.stream_grad_sq) : r.energy;
  };
  auto diss = [&](const StepRecord& r, bool stream) {
    return (stream ? r.stream_grad_sq : r.grad_u_sq) + r.cutoff_term;
  };
  auto residual = [&](std::size_t k, bool stream, double& lhs, double& rhs) {
    const auto& a = st[k - 1];
    const auto& b = st[k];
    const double d = nu * (b.t - a.t) * 0.5 * (diss(a, stream) + diss(b, stream));
    lhs = std::abs(energy(b, stream) - energy(a, stream) + d);
    rhs = d > 0.0 ? d : energy(a, stream);
  };

  EstimateReport rep;
  rep.name = "energy";
  double worst = 0.0, worst_composed = 0.0;
  int increases = 0, increases_composed = 0;
  bool all_zero = true;
  for (std::size_t k = 1; k < st.size(); ++k) {
    double lhs, rhs;
    residual(k, use_stream, lhs, rhs);
    if (rhs != 0.0) all_zero = false;
    rep.t.push_back(st[k].t);
    rep.lhs.push_back(lhs);
    rep.rhs.push_back(rhs);
    if (rhs > 0.0) worst = std::max(worst, lhs / rhs);
    else if (lhs > 0.0) worst = kInf;
    double lc, rc;
    residual(k, false, lc, rc);
    if (rc > 0.0) worst_composed = std::max(worst_composed, lc / rc);
    const double h1a = std::sqrt(2.0 * energy(st[k - 1], use_stream));
    const double h1b = std::sqrt(2.0 * energy(st[k], use_stream));
    if (h1b > h1a * (1.0 + 1e-14)) ++increases;
    if (st[k].u_h1 > st[k - 1].u_h1 * (1.0 + 1e-14)) ++increases_composed;
  }
  rep.measured_constant = worst;
  rep.degenerate = all_zero;
  const bool monotone = nu == 0.0 || (increases == 0 && increases_composed == 0);
  rep.passed = worst < residual_tol && monotone;
  rep.metrics = {{"max_relative_residual", worst},
                 {"max_relative_residual_composed", worst_composed},
                 {"h1_increases", static_cast<double>(increases)},
                 {"h1_increases_composed", static_cast<double>(increases_composed)},
                 {"stream_norms", use_stream ? 1.0 : 0.0},
                 {"residual_tol", residual_tol}};
  rep.note = nu == 0.0 ? "nu = 0: residual relative to the energy" : "residual relative to the step dissipation";
  return rep;
}

std::vector<TestField> canonical_test_fields(double T) {
  if (!(T > 0.0)) throw std::invalid_argument("test fields need T > 0");
  const double width = 0.25 * T;
  auto chi = [T, width](double t) { return smooth_step((T - t) / width); };
  auto chi_dot = [T, width](double t) { return -smooth_step_dot((T - t) / width) / width; };
  const double w = 2.0 * std::numbers::pi / T;

  std::vector<TestField> out;
  out.push_back({"radial_bump", [](double r, double) { return bump(r - 2.5); }, chi, chi_dot});
  out.push_back({"mode1_bump", [](double r, double th) { return bump(r - 2.5) * std::cos(th); },
                 chi, chi_dot});
  out.push_back({"modulated_bump",
                 [](double r, double th) {
                   const double d2 = r * r + 6.25 - 5.0 * r * std::sin(th);
                   return bump(std::sqrt(std::max(d2, 0.0)));
                 },
                 [chi, w](double t) { return std::cos(w * t) * chi(t); },
                 [chi, chi_dot, w](double t) {
                   return -w * std::sin(w * t) * chi(t) + std::cos(w * t) * chi_dot(t);
                 }});
  return out;
}

TestField offcentre_test_field(const std::string& name, double rc, double theta_c, double T) {
  if (!(T > 0.0)) throw std::invalid_argument("test fields need T > 0");
  const double width = 0.25 * T;
  return {name,
          [rc, theta_c](double r, double th) {
            const double d2 = r * r + rc * rc - 2.0 * r * rc * std::cos(th - theta_c);
            return bump(std::sqrt(std::max(d2, 0.0)));
          },
          [T, width](double t) { return smooth_step((T - t) / width); },
          [T, width](double t) { return -smooth_step_dot((T - t) / width) / width; }};
}

EstimateReport check_weak_form(const Trajectory& traj, const std::vector<TestField>& fields,
                               double residual_tol) {
  const auto& states = traj.states;
  if (states.size() < 11)
    throw std::invalid_argument("weak-form check needs at least 11 stored states, got " +
                                std::to_string(states.size()));
  const auto& grid = traj.grid;
  const auto& g = *grid;
  const double nu = traj.config.nu;
  const double t_end = states.back().t;

  // Per-state quantities that do not depend on the test field.
  struct Cached {
    VectorField u, v, nonlinear, damped;
  };
  std::vector<Cached> cache;
  for (const auto& s : states) {
    const VectorField v = s.u - laplacian(s.u);
    const VectorField dv1 = grad(v.u1()), dv2 = grad(v.u2());
    const VectorField du1 = grad(s.u.u1()), du2 = grad(s.u.u2());
    const auto& u1 = s.u.u1();
    const auto& u2 = s.u.u2();
    // (u.grad v)_i + sum_j d_i u_j v_j
    ScalarField n1 = u1 * dv1.u1() + u2 * dv1.u2() + du1.u1() * v.u1() + du2.u1() * v.u2();
    ScalarField n2 = u1 * dv2.u1() + u2 * dv2.u2() + du1.u2() * v.u1() + du2.u2() * v.u2();
    ScalarField one_minus = ScalarField::sample(grid, [](double, double) { return 1.0; });
    one_minus -= traj.cutoff;
    cache.push_back({s.u, v, VectorField(std::move(n1), std::move(n2)), one_minus * s.u});
  }

  double pairing_size = 0.0;  // sup_t ||u||_H1 (1 + ||v||_L2)
  for (const auto& c : cache)
    pairing_size = std::max(pairing_size, sobolev_norm(c.u, SobolevOrder::h(1)) *
                                              (1.0 + std::sqrt(inner(c.v, c.v))));

  EstimateReport rep;
  rep.name = "weak_form";
  double worst = 0.0;
  for (const auto& f : fields) {
    const ScalarField b = ScalarField::sample(grid, f.b);
    for (int i = 0; i < g.n_r(); ++i) {
      if (g.r(i) > 1.25 && g.r(i) < 0.5 * g.r_max()) continue;
      for (int j = 0; j < g.n_theta(); ++j)
        if (b(i, j) != 0.0)
          throw std::invalid_argument("test field " + f.name +
                                      " is not supported away from the boundaries");
    }
    if (std::abs(f.chi(t_end)) > 1e-14)
      throw std::invalid_argument("test field " + f.name + " does not vanish at the horizon");
    const VectorField P = perp_grad(b);
    const double P_h1 = sobolev_norm(P, SobolevOrder::h(1));
    const double div_err = div(P).max_abs();
    if (div_err > 1e-10 * std::max(1.0, P.max_abs()))
      throw std::invalid_argument("test field " + f.name + " is not divergence-free");

    std::vector<double> a_t, c_t, d_t, e_t;
    double b_term = 0.0;
    for (std::size_t k = 0; k < states.size(); ++k) {
      const auto& c = cache[k];
      const double t = states[k].t;
      const double vp = inner(c.u, P) + grad_inner(c.u, P);
      const double gp = grad_inner(c.u, P);
      if (k == 0) b_term = f.chi(t) * vp;
      a_t.push_back(f.chi_dot(t) * vp);
      c_t.push_back(nu * f.chi(t) * inner(c.damped, P));
      d_t.push_back(nu * f.chi(t) * gp);
      e_t.push_back(f.chi(t) * inner(c.nonlinear, P));
    }
    auto integrate_t = [&](const std::vector<double>& y) {
      double acc = 0.0;
      for (std::size_t k = 1; k < y.size(); ++k)
        acc += 0.5 * (states[k].t - states[k - 1].t) * (y[k] + y[k - 1]);
      return acc;
    };
    const double A = integrate_t(a_t), C = integrate_t(c_t), D = integrate_t(d_t),
                 E = integrate_t(e_t);
    const double total = -A + E + C + D - b_term;
    const double scale = std::max({std::abs(A), std::abs(b_term), std::abs(C), std::abs(D), std::abs(E)});
    // A field orthogonal to the trajectory (every term at round-off against the
    // Cauchy-Schwarz size of the pairing) has residual zero by definition.
    const bool orthogonal = scale <= kOrthogonalRel * pairing_size * P_h1 * std::max(1.0, t_end) * (1.0 + nu);
    const double normalized = (scale > 0.0 && !orthogonal) ? std::abs(total) / scale : 0.0;
    rep.t.push_back(t_end);
    rep.lhs.push_back(std::abs(total));
    rep.rhs.push_back(scale);
    rep.metrics.push_back({f.name, normalized});
    rep.metrics.push_back({f.name + "_scale", scale});
    rep.metrics.push_back({f.name + "_orthogonal", orthogonal ? 1.0 : 0.0});
    worst = std::max(worst, normalized);
  }
  rep.measured_constant = worst;
  rep.degenerate = std::all_of(rep.rhs.begin(), rep.rhs.end(), [](double s) { return s == 0.0; });
  rep.passed = worst < residual_tol;
  return rep;
}

EstimateReport check_h3_recovery(const FlowState& state) {
  EstimateReport rep;
  rep.name = "h3_recovery";
  const double lhs = sobolev_seminorm(state.u, 3);
  const double base = sobolev_norm(state.q, SobolevOrder::l2()) + sobolev_norm(state.u, SobolevOrder::l2());
  rep.t = {state.t};
  rep.lhs = {lhs};
  if (base > 0.0) {
    rep.measured_constant = lhs / base;
    rep.passed = std::isfinite(rep.measured_constant);
  } else {
    rep.measured_constant = lhs > 0.0 ? kInf : 0.0;
    rep.passed = lhs == 0.0;
    rep.degenerate = lhs == 0.0;
  }
  rep.rhs = {rep.measured_constant * base};
  return rep;
}

void attach_refinement(EstimateReport& fine, const EstimateReport& coarse) {
  fine.refinement_trend = std::make_pair(coarse.measured_constant, fine.measured_constant);
}

bool refinement_stable(const EstimateReport& r, double factor) {
  if (!r.refinement_trend) return false;
  const auto [a, b] = *r.refinement_trend;
  if (a == 0.0 && b == 0.0) return true;
  if (!(a > 0.0 && b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) return false;
  const double ratio = b / a;
  return ratio <= factor && ratio >= 1.0 / factor;
}

std::string report_json(const EstimateReport& r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["t"] = r.t;
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["measured_constant"] = r.measured_constant;
  j["passed"] = r.passed;
  j["degenerate"] = r.degenerate;
  if (r.refinement_trend)
    j["refinement_trend"] = {r.refinement_trend->first, r.refinement_trend->second};
  nlohmann::json m = nlohmann::json::object();
  for (const auto& [k, v] : r.metrics) m[k] = v;
  j["metrics"] = m;
  if (!r.note.empty()) j["note"] = r.note;
  return j.dump(2);
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string trend_text(const EstimateReport& r) {
  if (!r.refinement_trend) return "-";
  return fmt(r.refinement_trend->first) + " -> " + fmt(r.refinement_trend->second);
}

}  // namespace

std::string summary_csv(const std::vector<EstimateReport>& reports) {
  std::ostringstream os;
  os << "name,measured_constant,passed,degenerate,trend_coarse,trend_fine\n";
  char buf[64];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%.17g", r.measured_constant);
    os << r.name << ',' << buf << ',' << (r.passed ? 1 : 0) << ',' << (r.degenerate ? 1 : 0) << ',';
    if (r.refinement_trend) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g", r.refinement_trend->first,
                    r.refinement_trend->second);
      os << buf;
    } else {
      os << ',';
    }
    os << '\n';
  }
  return os.str();
}

std::string summary_table(const std::vector<EstimateReport>& reports) {
  std::size_t wn = 5, wc = 8, wt = 5;
  for (const auto& r : reports) {
    wn = std::max(wn, r.name.size());
    wc = std::max(wc, fmt(r.measured_constant).size());
    wt = std::max(wt, trend_text(r).size());
  }
  std::ostringstream os;
  auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w - s.size(), ' '); };
  os << pad("check", wn) << "  " << pad("constant", wc) << "  " << pad("trend", wt) << "  result\n";
  for (const auto& r : reports) {
    os << pad(r.name, wn) << "  " << pad(fmt(r.measured_constant), wc) << "  "
       << pad(trend_text(r), wt) << "  " << (r.passed ? "pass" : "FAIL")
       << (r.degenerate ? " (degenerate)" : "") << '\n';
  }
  return os.str();
}

}  // namespace sgflow
