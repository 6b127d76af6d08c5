#include "sgflow/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sgflow {

namespace {

void check_same_grid(const ScalarField& a, const ScalarField& b) {
  if (a.grid_ptr() != b.grid_ptr() && !a.grid().same_shape(b.grid()))
    throw std::invalid_argument("fields live on different grids");
}

}  // namespace

GridPtr PolarGrid::build(int n_r, int n_theta, double r_max, double stretch) {
  if (n_theta % 2 != 0)
    throw std::invalid_argument("n_theta must be even, got " + std::to_string(n_theta));
  if (r_max <= 1.0)
    throw std::invalid_argument("r_max must exceed 1, got " + std::to_string(r_max));
  if (n_r < 16) throw std::invalid_argument("n_r must be >= 16, got " + std::to_string(n_r));
  if (n_theta < 16)
    throw std::invalid_argument("n_theta must be >= 16, got " + std::to_string(n_theta));
  if (r_max < 8.0) throw std::invalid_argument("r_max must be >= 8, got " + std::to_string(r_max));
  if (!(stretch > 0.0))
    throw std::invalid_argument("stretch must be positive, got " + std::to_string(stretch));
  return GridPtr(new PolarGrid(n_r, n_theta, r_max, stretch));
}

PolarGrid::PolarGrid(int n_r, int n_theta, double r_max, double stretch)
    : n_r_(n_r),
      n_theta_(n_theta),
      r_max_(r_max),
      stretch_(stretch),
      kappa_(std::log(stretch)),
      dxi_(1.0 / (n_r - 1)),
      dtheta_(2.0 * std::numbers::pi / n_theta) {
  r_.resize(n_r);
  jac_.resize(n_r);
  weight_.resize(n_r);
  cell_.resize(n_r);
  half_.resize(n_r - 1);
  for (int i = 0; i < n_r; ++i) {
    const double xi = i * dxi_;
    r_[i] = (i == 0) ? 1.0 : (i == n_r - 1 ? r_max : map(xi));
    jac_[i] = map_derivative(xi);
    weight_[i] = r_[i] * jac_[i] * dxi_ * dtheta_ * ((i == 0 || i == n_r - 1) ? 0.5 : 1.0);
  }
  for (int i = 0; i + 1 < n_r; ++i) {
    const double xh = (i + 0.5) * dxi_;
    half_[i] = map(xh) / map_derivative(xh);
  }
  for (int i = 0; i < n_r; ++i) {
    double dr = 0.0;
    if (i + 1 < n_r) dr = std::max(dr, r_[i + 1] - r_[i]);
    if (i > 0) dr = std::max(dr, r_[i] - r_[i - 1]);
    cell_[i] = std::max(dr, r_[i] * dtheta_);
  }
  cos_.resize(n_theta);
  sin_.resize(n_theta);
  for (int j = 0; j < n_theta; ++j) {
    cos_[j] = std::cos(theta(j));
    sin_[j] = std::sin(theta(j));
  }

  const double h = dxi_;
  d1_.resize(n_r);
  lap_.resize(n_r);
  for (int i = 0; i < n_r; ++i) {
    const double J = jac_[i];
    if (i == 0) {
      d1_[i] = {0, 3, {-3.0 / (2 * h * J), 4.0 / (2 * h * J), -1.0 / (2 * h * J), 0.0}};
    } else if (i == n_r - 1) {
      d1_[i] = {n_r - 3, 3, {1.0 / (2 * h * J), -4.0 / (2 * h * J), 3.0 / (2 * h * J), 0.0}};
    } else {
      d1_[i] = {i - 1, 3, {-1.0 / (2 * h * J), 0.0, 1.0 / (2 * h * J), 0.0}};
    }

    if (i == 0 || i == n_r - 1) {
      // One-sided: f_rr + f_r / r = f_xx / J^2 + f_x (1 / (J r) - J' / J^3).
      const double xi = i * h;
      const double Jp = map_second_derivative(xi);
      const double a = 1.0 / (J * J);
      const double b = 1.0 / (J * r_[i]) - Jp / (J * J * J);
      std::array<double, 4> dx{}, dxx{};
      if (i == 0) {
        dx = {-3.0 / (2 * h), 4.0 / (2 * h), -1.0 / (2 * h), 0.0};
        dxx = {2.0 / (h * h), -5.0 / (h * h), 4.0 / (h * h), -1.0 / (h * h)};
        lap_[i].start = 0;
      } else {
        dx = {0.0, 1.0 / (2 * h), -4.0 / (2 * h), 3.0 / (2 * h)};
        dxx = {-1.0 / (h * h), 4.0 / (h * h), -5.0 / (h * h), 2.0 / (h * h)};
        lap_[i].start = n_r - 4;
      }
      lap_[i].len = 4;
      for (int k = 0; k < 4; ++k) lap_[i].c[k] = a * dxx[k] + b * dx[k];
    } else {
      const double am = half_[i - 1];
      const double ap = half_[i];
      const double s = 1.0 / (r_[i] * J * h * h);
      lap_[i] = {i - 1, 3, {s * am, -s * (am + ap), s * ap, 0.0}};
    }
  }

  fft_ = std::make_shared<AngularTransform>(n_r, n_theta);
}

double PolarGrid::map(double xi) const {
  if (std::abs(kappa_) < 1e-12) return 1.0 + (r_max_ - 1.0) * xi;
  return 1.0 + (r_max_ - 1.0) * std::expm1(kappa_ * xi) / std::expm1(kappa_);
}

double PolarGrid::map_derivative(double xi) const {
  if (std::abs(kappa_) < 1e-12) return r_max_ - 1.0;
  return (r_max_ - 1.0) * kappa_ * std::exp(kappa_ * xi) / std::expm1(kappa_);
}

double PolarGrid::map_second_derivative(double xi) const {
  if (std::abs(kappa_) < 1e-12) return 0.0;
  return kappa_ * map_derivative(xi);
}

double PolarGrid::inverse_map(double r) const {
  if (std::abs(kappa_) < 1e-12) return (r - 1.0) / (r_max_ - 1.0);
  return std::log1p((r - 1.0) * std::expm1(kappa_) / (r_max_ - 1.0)) / kappa_;
}

int PolarGrid::ring_below(double radius) const {
  if (radius <= 1.0) return 0;
  if (radius >= r_max_) return n_r_ - 1;
  int i = static_cast<int>(std::floor(inverse_map(radius) / dxi_));
  i = std::clamp(i, 0, n_r_ - 1);
  while (i + 1 < n_r_ && r_[i + 1] <= radius) ++i;
  while (i > 0 && r_[i] > radius) --i;
  return i;
}

double PolarGrid::max_cell_width() const { return *std::max_element(cell_.begin(), cell_.end()); }

bool PolarGrid::same_shape(const PolarGrid& o) const noexcept {
  return n_r_ == o.n_r_ && n_theta_ == o.n_theta_ && r_max_ == o.r_max_ && stretch_ == o.stretch_;
}

// ---------------------------------------------------------------------------

struct AngularTransform::Impl {
  int n_r;
  int n_theta;
  int n_modes;
  double* real_buf = nullptr;
  fftw_complex* spec_buf = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

AngularTransform::AngularTransform(int n_r, int n_theta) : impl_(std::make_unique<Impl>()) {
  auto& s = *impl_;
  s.n_r = n_r;
  s.n_theta = n_theta;
  s.n_modes = n_theta / 2 + 1;
  s.real_buf = fftw_alloc_real(static_cast<std::size_t>(n_r) * n_theta);
  s.spec_buf = fftw_alloc_complex(static_cast<std::size_t>(n_r) * s.n_modes);
  int n[] = {n_theta};
  s.fwd = fftw_plan_many_dft_r2c(1, n, n_r, s.real_buf, nullptr, 1, n_theta, s.spec_buf, nullptr,
                                 1, s.n_modes, FFTW_ESTIMATE);
  s.inv = fftw_plan_many_dft_c2r(1, n, n_r, s.spec_buf, nullptr, 1, s.n_modes, s.real_buf,
                                 nullptr, 1, n_theta, FFTW_ESTIMATE);
  if (!s.fwd || !s.inv) throw std::runtime_error("FFTW planning failed");
}

AngularTransform::~AngularTransform() {
  if (!impl_) return;
  fftw_destroy_plan(impl_->fwd);
  fftw_destroy_plan(impl_->inv);
  fftw_free(impl_->real_buf);
  fftw_free(impl_->spec_buf);
}

void AngularTransform::forward(std::span<const double> values, Spectrum& out) const {
  auto& s = *impl_;
  std::copy(values.begin(), values.end(), s.real_buf);
  fftw_execute(s.fwd);
  out.n_r = s.n_r;
  out.n_modes = s.n_modes;
  out.c.resize(static_cast<std::size_t>(s.n_r) * s.n_modes);
  const double scale = 1.0 / s.n_theta;
  for (std::size_t k = 0; k < out.c.size(); ++k)
    out.c[k] = {s.spec_buf[k][0] * scale, s.spec_buf[k][1] * scale};
}

void AngularTransform::inverse(const Spectrum& in, std::span<double> values) const {
  auto& s = *impl_;
  for (std::size_t k = 0; k < in.c.size(); ++k) {
    s.spec_buf[k][0] = in.c[k].real();
    s.spec_buf[k][1] = in.c[k].imag();
  }
  fftw_execute(s.inv);
  std::copy(s.real_buf, s.real_buf + values.size(), values.begin());
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(GridPtr grid) : grid_(std::move(grid)), values_(grid_->size(), 0.0) {}

ScalarField::ScalarField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_->size())
    throw std::invalid_argument("value count does not match grid size");
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  check_same_grid(*this, o);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
  check_same_grid(*this, o);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
  return *this;
}

ScalarField& ScalarField::operator*=(double a) {
  for (auto& v : values_) v *= a;
  return *this;
}

ScalarField& ScalarField::operator*=(const ScalarField& o) {
  check_same_grid(*this, o);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] *= o.values_[k];
  return *this;
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }
ScalarField operator*(ScalarField a, const ScalarField& b) { return a *= b; }

// ---------------------------------------------------------------------------

VectorField::VectorField(GridPtr grid) : u1_(grid), u2_(std::move(grid)) {}

VectorField::VectorField(ScalarField u1, ScalarField u2) : u1_(std::move(u1)), u2_(std::move(u2)) {
  check_same_grid(u1_, u2_);
}

ScalarField VectorField::radial() const {
  ScalarField out(grid_ptr());
  const auto& g = grid();
  for (int i = 0; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j)
      out(i, j) = g.cos_theta(j) * u1_(i, j) + g.sin_theta(j) * u2_(i, j);
  return out;
}

ScalarField VectorField::azimuthal() const {
  ScalarField out(grid_ptr());
  const auto& g = grid();
  for (int i = 0; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j)
      out(i, j) = -g.sin_theta(j) * u1_(i, j) + g.cos_theta(j) * u2_(i, j);
  return out;
}

VectorField& VectorField::operator+=(const VectorField& o) {
  u1_ += o.u1_;
  u2_ += o.u2_;
  if (stream_ && o.stream_)
    *stream_ += *o.stream_;
  else
    stream_.reset();
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& o) {
  u1_ -= o.u1_;
  u2_ -= o.u2_;
  if (stream_ && o.stream_)
    *stream_ -= *o.stream_;
  else
    stream_.reset();
  return *this;
}

VectorField& VectorField::operator*=(double a) {
  u1_ *= a;
  u2_ *= a;
  if (stream_) *stream_ *= a;
  return *this;
}

double VectorField::max_abs() const {
  double m = 0.0;
  const auto a = u1_.values();
  const auto b = u2_.values();
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::hypot(a[k], b[k]));
  return m;
}

bool VectorField::all_finite() const { return u1_.all_finite() && u2_.all_finite(); }

VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
VectorField operator*(double s, VectorField a) { return a *= s; }

VectorField operator*(const ScalarField& s, const VectorField& a) {
  return VectorField(s * a.u1(), s * a.u2());
}

double boundary_trace_norm(const VectorField& u) {
  const auto& g = u.grid();
  double acc = 0.0;
  for (int j = 0; j < g.n_theta(); ++j) {
    const double a = u.u1()(0, j);
    const double b = u.u2()(0, j);
    acc += a * a + b * b;
  }
  return std::sqrt(acc * g.dtheta());
}

}  // namespace sgflow
