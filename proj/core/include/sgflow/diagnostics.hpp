#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sgflow/driver.hpp"

namespace sgflow {

// Every inequality is checked as lhs <= rhs(C) with the smallest C for which it holds.
struct EstimateReport {
  std::string name;
  std::vector<double> t;
  std::vector<double> lhs;
  std::vector<double> rhs;  // evaluated at measured_constant
  double measured_constant = 0.0;
  bool passed = false;
  bool degenerate = false;
  std::optional<std::pair<double, double>> refinement_trend;  // (coarse, fine)
  std::vector<std::pair<std::string, double>> metrics;
  std::string note;

  double metric(const std::string& key) const;
};

// ||q(t)||_p^p <= ||q0||_p^p + C nu int_0^t ||u||_H1^p, p in {1, 2}.
EstimateReport check_q_lp(const Trajectory& traj, int p);

// support_outer_radius(q(t)) <= max(R0, n) + int_0^t ||u||_Linf + one cell.
EstimateReport check_support(const Trajectory& traj);

// ||q(t)||_Hs <= C (||q0||_Hs + (nu T)^{1/2} sup ||u||_Hs) exp(C t sup ||u||_H{s+2}).
// s = 1 reads the step log; other orders use the stored states. Throws invalid_argument when
// s + 2 exceeds the grid's derivative budget.
EstimateReport check_hs_transport(const Trajectory& traj, int s);

// Discrete identity E_k - E_{k-1} = -nu dt (D_k + D_{k-1}) / 2 with E = (|u|^2 + |grad u|^2)/2
// and D = |grad u|^2 + int (1 - cutoff)|u|^2, using the stream-function norms when logged.
// The residual is relative to the step dissipation (to E_{k-1} when nu = 0). Passes when every
// residual is below residual_tol and ||u||_H1 never increases (nu > 0).
EstimateReport check_energy(const Trajectory& traj, double residual_tol = 1e-3);

// Divergence-free test field phi(x, t) = chi(t) perp_grad(b)(x).
struct TestField {
  std::string name;
  std::function<double(double r, double theta)> b;
  std::function<double(double t)> chi;
  std::function<double(double t)> chi_dot;
};

// Radial bump, mode-1 bump and time-modulated off-centre bump, all vanishing before t = T.
std::vector<TestField> canonical_test_fields(double T);
// Unit-radius bump centred at polar position (rc, theta_c), with the canonical time profile.
TestField offcentre_test_field(const std::string& name, double rc, double theta_c, double T);

// Space-time residual of the weak form of the velocity equation, normalized by the largest
// term. Needs at least 11 stored states; throws invalid_argument when b is not compactly
// supported away from the wall and the outer boundary.
EstimateReport check_weak_form(const Trajectory& traj, const std::vector<TestField>& fields,
                               double residual_tol = 1e-2);

// |u|_H3 <= C (||q||_L2 + ||u||_L2).
EstimateReport check_h3_recovery(const FlowState& state);

// Sets refinement_trend to (coarse, fine) measured constants.
void attach_refinement(EstimateReport& fine, const EstimateReport& coarse);
// True when both constants are zero or their ratio lies in [1/factor, factor].
bool refinement_stable(const EstimateReport& r, double factor);

std::string report_json(const EstimateReport& r);
std::string summary_csv(const std::vector<EstimateReport>& reports);
std::string summary_table(const std::vector<EstimateReport>& reports);

}  // namespace sgflow
