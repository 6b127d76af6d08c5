#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "sgflow/banded.hpp"
#include "sgflow/grid.hpp"

namespace sgflow {

enum class FarField {
  none,
  log_matched,        // Poisson: m = 0 flux row plus decaying Robin rows for m >= 1
  harmonic_robin,     // Poisson without a mean mode
  two_branch_decay,   // clamped stream: harmonic and modified-Bessel decay rows
};

struct ModeSystem {
  int m = 0;
  BandedMatrix matrix;
  std::vector<double> rhs;  // n_r x 2 column-major (real and imaginary parts)
  std::string boundary_rows;
};

template <class Field>
struct EllipticSolution {
  Field field;
  // Largest per-mode ||A x - b|| / (||A|| ||x|| + ||b||).
  double residual_l2 = 0.0;
  double min_rcond = 1.0;
  FarField farfield = FarField::none;
};

// Per-mode banded solvers for the exterior Poisson problem and the clamped stream problem
// (1 - Delta) Delta phi = q. Factorizations are built once per grid.
class EllipticSolver {
 public:
  explicit EllipticSolver(GridPtr grid, double tolerance = 1e-8);

  const GridPtr& grid_ptr() const noexcept { return grid_; }
  double tolerance() const noexcept { return tol_; }

  // Delta psi = q, psi = 0 on r = 1. q must vanish outside r_max / 2.
  EllipticSolution<ScalarField> solve_poisson(const ScalarField& q) const;

  // u - Delta u + grad p = perp_grad(psi), u = 0 on r = 1, written as u = perp_grad(phi)
  // with (1 - Delta) Delta phi = Delta psi.
  EllipticSolution<VectorField> solve_modified_stokes(const ScalarField& psi) const;

  // (1 - Delta) Delta phi = q with phi = d_r phi = 0 on r = 1; rows next to the boundaries
  // carry boundary conditions, so q is only read on rings 2 .. n_r - 3.
  EllipticSolution<ScalarField> solve_clamped_stream(const ScalarField& q) const;

  ModeSystem poisson_system(int m) const;
  ModeSystem stokes_system(int m) const;

 private:
  GridPtr grid_;
  double tol_;
  std::vector<std::unique_ptr<BandedLU>> poisson_;
  std::vector<std::unique_ptr<BandedLU>> stokes_;
};

// The flux row of the m = 0 Poisson system: r d_r psi = Q / (2 pi) with Q the integral of q.
double poisson_far_flux(const ScalarField& q);

// Ratio K_m'(x) / K_m(x) evaluated through the stable upward recurrence.
double bessel_k_log_derivative(int m, double x);

void write_matrix_market(const ModeSystem& sys, const std::filesystem::path& path);

struct KernelCheck {
  double normalized_sigma_min = 0.0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  int worst_mode = 0;
};

// Smallest over largest singular value of the stacked div / curl / normal-trace operator
// (optionally with u = 0 rows on the outer ring), assembled per angular mode.
KernelCheck harmonic_kernel_check(const GridPtr& grid, bool include_decay_rows);

struct PoissonConstantsReport {
  bool degenerate = true;
  double max_gradient_ratio = 0.0;
  double max_hessian_ratio = 0.0;
  std::vector<double> gradient_ratios;
  std::vector<double> hessian_ratios;
};

// ||grad psi|| / (R (||q||_2 + ||q||_1)) and ||D^2 psi|| / (R ||q||_2 + ||q||_1) per sample.
PoissonConstantsReport estimate_constants_poisson(double R, const std::vector<ScalarField>& samples,
                                                  const EllipticSolver& solver);

}  // namespace sgflow
