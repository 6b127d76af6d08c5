#pragma once

#include <string>
#include <vector>

#include "sgflow/elliptic.hpp"

namespace sgflow {

// Errors of a manufactured solution on successive radial doublings.
struct OrderStudy {
  std::string name;
  std::vector<int> n_r;
  std::vector<double> errors;
  std::vector<double> orders;  // log2(e_k / e_{k+1})
  double min_order = 0.0;
};

// Delta psi = q for a radial polynomial vorticity with nonzero total circulation; H1 error.
OrderStudy poisson_radial_study(const std::vector<int>& n_r, int n_theta);
// psi proportional to (r - 1)^4 (8 - r)^4 cos(theta) inside r < 8, zero outside; H1 error.
OrderStudy poisson_mode1_study(const std::vector<int>& n_r, int n_theta);
// u = perp_grad(phi), phi = (r - 1)^2 exp(1 - r) cos(theta), from psi = phi - Delta phi; H1 error.
OrderStudy stokes_mode1_study(const std::vector<int>& n_r, int n_theta);
// q_t + u.grad q + q = f with a prescribed swirling, wall-tangent velocity; n_theta = n_r and
// dt proportional to the radial spacing. L2 error at t = 0.5.
OrderStudy transport_study(const std::vector<int>& n_r);

struct ValidationReport {
  std::vector<OrderStudy> studies;
  KernelCheck kernel_plain;
  KernelCheck kernel_decay;
  double order_threshold = 1.8;
  double kernel_threshold = 1e-6;
  bool passed = false;
};

// All studies on n_r = base, 2 base, 4 base plus the kernel check on the base grid. Passing
// needs every order >= order_threshold and the kernel check with decay rows above threshold.
ValidationReport run_validation(int base_n_r, int base_n_theta);

std::string validation_table(const ValidationReport& rep);
std::string validation_json(const ValidationReport& rep);

}  // namespace sgflow
