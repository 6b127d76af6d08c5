#include "sgflow/elliptic.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <utility>

#include "sgflow/errors.hpp"
#include "sgflow/norms.hpp"
#include "sgflow/operators.hpp"

namespace sgflow {

namespace {

using SparseRow = std::vector<std::pair<int, double>>;

// Row `i` of the mode-m laplacian: radial stencil minus m^2 / r^2 on the diagonal.
SparseRow lap_row(const PolarGrid& g, int i, int m) {
  const RadialStencil& st = g.lap_stencil(i);
  SparseRow row;
  for (int k = 0; k < st.len; ++k) row.emplace_back(st.start + k, st.c[k]);
  const double diag = -static_cast<double>(m) * m / (g.r(i) * g.r(i));
  for (auto& [col, v] : row)
    if (col == i) v += diag;
  return row;
}

void add_row(BandedMatrix& a, int row, const SparseRow& coefs, double scale = 1.0) {
  for (const auto& [col, v] : coefs) a.add(row, col, scale * v);
}

SparseRow d1_row(const PolarGrid& g, int i) {
  const RadialStencil& st = g.d1_stencil(i);
  SparseRow row;
  for (int k = 0; k < st.len; ++k) row.emplace_back(st.start + k, st.c[k]);
  return row;
}

// sum_k c_k * row(node_k)
SparseRow compose(const SparseRow& outer, const std::vector<SparseRow>& rows_by_node,
                  int first_node) {
  SparseRow out;
  for (const auto& [node, c] : outer)
    for (const auto& [col, v] : rows_by_node[node - first_node]) {
      auto it = std::find_if(out.begin(), out.end(), [&](const auto& e) { return e.first == col; });
      if (it == out.end())
        out.emplace_back(col, c * v);
      else
        it->second += c * v;
    }
  return out;
}

double norm2(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

// Solves both columns in place and returns the normwise relative residual.
double solve_mode(const BandedLU& lu, std::vector<double>& rhs) {
  const int n = lu.matrix().n();
  const std::vector<double> b = rhs;
  lu.solve(rhs, 2);
  double worst = 0.0;
  const double anorm = lu.norm_inf();
  for (int col = 0; col < 2; ++col) {
    std::span<const double> x(rhs.data() + col * n, n);
    std::span<const double> bb(b.data() + col * n, n);
    auto ax = lu.matrix().multiply(x);
    for (int k = 0; k < n; ++k) ax[k] -= bb[k];
    const double denom = anorm * norm2(x) + norm2(bb);
    if (denom > 0.0) worst = std::max(worst, norm2(ax) / denom);
  }
  return worst;
}

}  // namespace

double bessel_k_log_derivative(int m, double x) {
  // rho_k = K_{k+1} / K_k obeys rho_k = 1 / rho_{k-1} + 2k / x.
  double rho_prev = std::cyl_bessel_k(1.0, x) / std::cyl_bessel_k(0.0, x);
  if (m == 0) return -rho_prev;
  double rho = rho_prev;
  for (int k = 1; k <= m; ++k) {
    rho_prev = rho;
    rho = 1.0 / rho_prev + 2.0 * k / x;
  }
  // K_m' = -(K_{m-1} + K_{m+1}) / 2
  return -0.5 * (1.0 / rho_prev + rho);
}

double poisson_far_flux(const ScalarField& q) {
  return integrate(q) / (2.0 * std::numbers::pi);
}

EllipticSolver::EllipticSolver(GridPtr grid, double tolerance)
    : grid_(std::move(grid)), tol_(tolerance) {
  const int modes = grid_->n_theta() / 2;
  poisson_.resize(modes);
  stokes_.resize(modes);
  for (int m = 0; m < modes; ++m) {
    poisson_[m] = std::make_unique<BandedLU>(poisson_system(m).matrix);
    stokes_[m] = std::make_unique<BandedLU>(stokes_system(m).matrix);
  }
}

ModeSystem EllipticSolver::poisson_system(int m) const {
  const auto& g = *grid_;
  const int n = g.n_r();
  ModeSystem sys{m, BandedMatrix(n, 2, 1), std::vector<double>(2 * n, 0.0), ""};
  auto& a = sys.matrix;
  a.add(0, 0, 1.0);
  for (int i = 1; i < n - 1; ++i) add_row(a, i, lap_row(g, i, m));
  if (m == 0) {
    const double c = g.half_coef(n - 2) / g.dxi();
    a.add(n - 1, n - 2, -c);
    a.add(n - 1, n - 1, c);
    sys.boundary_rows = "r=1: psi=0; r=r_max: r psi' = Q/(2 pi) (flux at last half node)";
  } else {
    add_row(a, n - 1, d1_row(g, n - 1));
    a.add(n - 1, n - 1, m / g.r_max());
    sys.boundary_rows = "r=1: psi=0; r=r_max: psi' + (m/r) psi = 0";
  }
  return sys;
}

ModeSystem EllipticSolver::stokes_system(int m) const {
  const auto& g = *grid_;
  const int n = g.n_r();
  ModeSystem sys{m, BandedMatrix(n, 3, 2), std::vector<double>(2 * n, 0.0), ""};
  auto& a = sys.matrix;

  std::vector<SparseRow> lrows(n);
  for (int i = 0; i < n; ++i) lrows[i] = lap_row(g, i, m);

  a.add(0, 0, 1.0);
  add_row(a, 1, d1_row(g, 0));
  for (int i = 2; i < n - 2; ++i) {
    add_row(a, i, lrows[i]);
    add_row(a, i, compose(lrows[i], lrows, 0), -1.0);
  }

  // w = L phi on the last three nodes; both decaying branches are selected at r_max.
  const SparseRow dlast = d1_row(g, n - 1);
  const SparseRow dw = compose(dlast, lrows, 0);
  SparseRow harmonic = dlast;  // (phi - w)' + (m / r) (phi - w)
  for (const auto& [col, v] : dw) harmonic.emplace_back(col, -v);
  harmonic.emplace_back(n - 1, m / g.r_max());
  for (const auto& [col, v] : lrows[n - 1]) harmonic.emplace_back(col, -(m / g.r_max()) * v);
  add_row(a, n - 2, harmonic);

  const double kappa = bessel_k_log_derivative(m, g.r_max());
  add_row(a, n - 1, dw);
  add_row(a, n - 1, lrows[n - 1], -kappa);

  std::ostringstream desc;
  desc << "r=1: phi=0, phi'=0; r=r_max: (phi-w)' + (m/r)(phi-w) = 0, w' = " << kappa
       << " w with w = laplacian(phi)";
  sys.boundary_rows = desc.str();
  return sys;
}

EllipticSolution<ScalarField> EllipticSolver::solve_poisson(const ScalarField& q) const {
  const auto& g = *grid_;
  const int n = g.n_r();
  if (!q.all_finite()) throw EllipticError("Poisson source contains non-finite values");
  const double outer = support_outer_radius(q, default_support_threshold(q));
  if (outer >= 0.5 * g.r_max())
    throw SupportOverflowError("Poisson source reaches r = " + std::to_string(outer) +
                               ", beyond r_max/2 = " + std::to_string(0.5 * g.r_max()));

  Spectrum s;
  g.angular().forward(q.values(), s);
  const double flux = poisson_far_flux(q);
  EllipticSolution<ScalarField> out{ScalarField(grid_), 0.0, 1.0, FarField::log_matched};
  std::vector<double> rhs(2 * n);
  for (int m = 0; m < s.n_modes; ++m) {
    if (m == g.n_theta() / 2) {
      for (int i = 0; i < n; ++i) s.at(i, m) = 0.0;
      continue;
    }
    std::fill(rhs.begin(), rhs.end(), 0.0);
    for (int i = 1; i < n - 1; ++i) {
      rhs[i] = s.at(i, m).real();
      rhs[n + i] = s.at(i, m).imag();
    }
    if (m == 0) rhs[n - 1] = flux;
    out.residual_l2 = std::max(out.residual_l2, solve_mode(*poisson_[m], rhs));
    out.min_rcond = std::min(out.min_rcond, poisson_[m]->rcond());
    for (int i = 0; i < n; ++i) s.at(i, m) = {rhs[i], rhs[n + i]};
  }
  g.angular().inverse(s, out.field.values());
  if (!(out.residual_l2 <= tol_))
    throw EllipticError("Poisson residual " + std::to_string(out.residual_l2) +
                        " above tolerance");
  return out;
}

EllipticSolution<ScalarField> EllipticSolver::solve_clamped_stream(const ScalarField& q) const {
  const auto& g = *grid_;
  const int n = g.n_r();
  if (!q.all_finite()) throw EllipticError("stream source contains non-finite values");
  Spectrum s;
  g.angular().forward(q.values(), s);
  EllipticSolution<ScalarField> out{ScalarField(grid_), 0.0, 1.0, FarField::two_branch_decay};
  std::vector<double> rhs(2 * n);
  for (int m = 0; m < s.n_modes; ++m) {
    if (m == g.n_theta() / 2) {
      for (int i = 0; i < n; ++i) s.at(i, m) = 0.0;
      continue;
    }
    std::fill(rhs.begin(), rhs.end(), 0.0);
    for (int i = 2; i < n - 2; ++i) {
      rhs[i] = s.at(i, m).real();
      rhs[n + i] = s.at(i, m).imag();
    }
    out.residual_l2 = std::max(out.residual_l2, solve_mode(*stokes_[m], rhs));
    out.min_rcond = std::min(out.min_rcond, stokes_[m]->rcond());
    for (int i = 0; i < n; ++i) s.at(i, m) = {rhs[i], rhs[n + i]};
  }
  g.angular().inverse(s, out.field.values());
  if (!(out.residual_l2 <= tol_))
    throw EllipticError("clamped stream residual " + std::to_string(out.residual_l2) +
                        " above tolerance");
  return out;
}

EllipticSolution<VectorField> EllipticSolver::solve_modified_stokes(const ScalarField& psi) const {
  auto phi = solve_clamped_stream(laplacian(psi));
  EllipticSolution<VectorField> out{perp_grad(phi.field), phi.residual_l2, phi.min_rcond,
                                    phi.farfield};
  const double scale = out.field.max_abs();
  const double trace = boundary_trace_norm(out.field);
  if (scale > 0.0 && trace > tol_ * scale)
    throw EllipticError("no-slip trace " + std::to_string(trace) + " above tolerance");
  return out;
}

void write_matrix_market(const ModeSystem& sys, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  const auto& a = sys.matrix;
  std::size_t nnz = 0;
  for (int r = 0; r < a.n(); ++r)
    for (int c = std::max(0, r - a.kl()); c <= std::min(a.n() - 1, r + a.ku()); ++c)
      if (a.get(r, c) != 0.0) ++nnz;
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << "% mode " << sys.m << "\n% " << sys.boundary_rows << "\n";
  os << a.n() << ' ' << a.n() << ' ' << nnz << '\n';
  os.precision(17);
  for (int r = 0; r < a.n(); ++r)
    for (int c = std::max(0, r - a.kl()); c <= std::min(a.n() - 1, r + a.ku()); ++c)
      if (const double v = a.get(r, c); v != 0.0) os << r + 1 << ' ' << c + 1 << ' ' << v << '\n';
}

// ---------------------------------------------------------------------------

namespace {

// Singular values of a column-major rows x cols real matrix.
std::vector<double> singular_values(std::vector<double> a, int rows, int cols) {
  std::vector<double> s(std::min(rows, cols));
  const lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', rows, cols, a.data(), rows,
                                         s.data(), nullptr, 1, nullptr, 1);
  if (info != 0) throw std::runtime_error("dgesdd failed with info " + std::to_string(info));
  return s;
}

}  // namespace

KernelCheck harmonic_kernel_check(const GridPtr& grid, bool include_decay_rows) {
  const auto& g = *grid;
  const int n = g.n_r();
  const int nyq = g.n_theta() / 2;
  const double sdt = std::sqrt(g.dtheta());
  KernelCheck out{0.0, std::numeric_limits<double>::infinity(), 0.0, 0};

  // Complex block in the scaled unknowns y = sqrt(w_i) (u_r, u_theta)_m; embedded as a real
  // matrix [[Re, -Im], [Im, Re]] whose singular values are those of the block, doubled.
  const int crow = 2 * n + 1 + (include_decay_rows ? 2 : 0);
  const int ccol = 2 * n;
  for (int m = 0; m <= nyq; ++m) {
    const double mm = (m == nyq) ? 0.0 : static_cast<double>(m);
    std::vector<double> re(static_cast<std::size_t>(crow) * ccol, 0.0), im(re.size(), 0.0);
    auto at = [&](std::vector<double>& a, int r, int c) -> double& {
      return a[static_cast<std::size_t>(c) * crow + r];
    };
    auto col_scale = [&](int i) { return 1.0 / std::sqrt(g.weight(i)); };
    for (int i = 0; i < n; ++i) {
      const double sw = std::sqrt(g.weight(i));
      const RadialStencil& st = g.d1_stencil(i);
      for (int k = 0; k < st.len; ++k) {
        const int node = st.start + k;
        const double v = sw * st.c[k] * g.r(node) / g.r(i) * col_scale(node);
        at(re, i, node) += v;          // div: d_r(r u_r) / r
        at(re, n + i, n + node) += v;  // curl: d_r(r u_theta) / r
      }
      at(im, i, n + i) += sw * mm / g.r(i) * col_scale(i);   // div: + i m u_theta / r
      at(im, n + i, i) += -sw * mm / g.r(i) * col_scale(i);  // curl: - i m u_r / r
    }
    at(re, 2 * n, 0) = sdt * col_scale(0);
    if (include_decay_rows) {
      at(re, 2 * n + 1, n - 1) = sdt * col_scale(n - 1);
      at(re, 2 * n + 2, 2 * n - 1) = sdt * col_scale(n - 1);
    }

    const bool real_block = (m == 0 || m == nyq);
    std::vector<double> sv;
    if (real_block) {
      sv = singular_values(re, crow, ccol);
    } else {
      const int rr = 2 * crow, cc = 2 * ccol;
      std::vector<double> big(static_cast<std::size_t>(rr) * cc, 0.0);
      for (int c = 0; c < ccol; ++c)
        for (int r = 0; r < crow; ++r) {
          const double a = re[static_cast<std::size_t>(c) * crow + r];
          const double b = im[static_cast<std::size_t>(c) * crow + r];
          big[static_cast<std::size_t>(c) * rr + r] = a;
          big[static_cast<std::size_t>(c + ccol) * rr + r] = -b;
          big[static_cast<std::size_t>(c) * rr + r + crow] = b;
          big[static_cast<std::size_t>(c + ccol) * rr + r + crow] = a;
        }
      sv = singular_values(std::move(big), rr, cc);
    }
    const double smax = *std::max_element(sv.begin(), sv.end());
    const double smin = *std::min_element(sv.begin(), sv.end());
    out.sigma_max = std::max(out.sigma_max, smax);
    if (smin < out.sigma_min) {
      out.sigma_min = smin;
      out.worst_mode = m;
    }
  }
  out.normalized_sigma_min = out.sigma_max > 0.0 ? out.sigma_min / out.sigma_max : 0.0;
  return out;
}

PoissonConstantsReport estimate_constants_poisson(double R, const std::vector<ScalarField>& samples,
                                                  const EllipticSolver& solver) {
  PoissonConstantsReport rep;
  for (const auto& q : samples) {
    const double l1 = sobolev_norm(q, SobolevOrder::l1());
    const double l2 = sobolev_norm(q, SobolevOrder::l2());
    if (l1 == 0.0 && l2 == 0.0) continue;
    const double outer = support_outer_radius(q, default_support_threshold(q));
    const int ring = q.grid().ring_below(outer);
    if (outer > R + q.grid().cell_width(ring))
      throw SupportOverflowError("sample supported out to r = " + std::to_string(outer) +
                                 ", beyond R = " + std::to_string(R));
    const auto psi = solver.solve_poisson(q).field;
    const double g1 = sobolev_seminorm(psi, 1);
    const double g2 = sobolev_seminorm(psi, 2);
    rep.gradient_ratios.push_back(g1 / (R * (l2 + l1)));
    rep.hessian_ratios.push_back(g2 / (R * l2 + l1));
  }
  rep.degenerate = rep.gradient_ratios.empty();
  for (double v : rep.gradient_ratios) rep.max_gradient_ratio = std::max(rep.max_gradient_ratio, v);
  for (double v : rep.hessian_ratios) rep.max_hessian_ratio = std::max(rep.max_hessian_ratio, v);
  return rep;
}

}  // namespace sgflow
