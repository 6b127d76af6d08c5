#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace sgflow {

class AngularTransform;
class PolarGrid;

using GridPtr = std::shared_ptr<const PolarGrid>;

// Finite-difference stencil over consecutive radial nodes [start, start + len).
struct RadialStencil {
  int start = 0;
  int len = 0;
  std::array<double, 4> c{};
};

// Exterior annulus 1 <= r <= r_max, uniform in the mapped coordinate xi in [0, 1]
// and in theta. The radial map is r(xi) = 1 + (r_max - 1) (e^{k xi} - 1) / (e^k - 1)
// with k = ln(stretch); stretch = 1 is the uniform map, stretch = r_max is log-polar.
class PolarGrid {
 public:
  static constexpr int kMaxSobolevOrder = 5;

  static GridPtr build(int n_r, int n_theta, double r_max, double stretch = 1.0);

  int n_r() const noexcept { return n_r_; }
  int n_theta() const noexcept { return n_theta_; }
  int n_modes() const noexcept { return n_theta_ / 2 + 1; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(n_r_) * n_theta_; }
  double r_min() const noexcept { return 1.0; }
  double r_max() const noexcept { return r_max_; }
  double stretch() const noexcept { return stretch_; }
  double dxi() const noexcept { return dxi_; }
  double dtheta() const noexcept { return dtheta_; }

  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(i) * n_theta_ + j;
  }

  double r(int i) const { return r_[i]; }
  double jac(int i) const { return jac_[i]; }
  double theta(int j) const { return j * dtheta_; }
  double cos_theta(int j) const { return cos_[j]; }
  double sin_theta(int j) const { return sin_[j]; }

  // Area weight of a node on ring i: trapezoid in xi times r J dxi dtheta.
  double weight(int i) const { return weight_[i]; }
  // (r / J) at xi_{i+1/2}, i in [0, n_r - 2].
  double half_coef(int i) const { return half_[i]; }
  // max(radial spacing, arc spacing) around ring i.
  double cell_width(int i) const { return cell_[i]; }
  double max_cell_width() const;

  double map(double xi) const;
  double map_derivative(double xi) const;
  double map_second_derivative(double xi) const;
  double inverse_map(double r) const;

  // Ring index of the last node with r <= radius (clamped to the grid).
  int ring_below(double radius) const;

  const RadialStencil& d1_stencil(int i) const { return d1_[i]; }
  // Stencil of f_rr + f_r / r; interior rows are the compact conservative form.
  const RadialStencil& lap_stencil(int i) const { return lap_[i]; }

  const AngularTransform& angular() const { return *fft_; }

  bool same_shape(const PolarGrid& other) const noexcept;

 private:
  PolarGrid(int n_r, int n_theta, double r_max, double stretch);

  int n_r_;
  int n_theta_;
  double r_max_;
  double stretch_;
  double kappa_;
  double dxi_;
  double dtheta_;
  std::vector<double> r_, jac_, weight_, half_, cell_;
  std::vector<double> cos_, sin_;
  std::vector<RadialStencil> d1_, lap_;
  std::shared_ptr<AngularTransform> fft_;
};

// Angular Fourier coefficients c_m = (1/N) sum_j f_j e^{-i m theta_j}, m = 0..N/2, per ring.
struct Spectrum {
  int n_r = 0;
  int n_modes = 0;
  std::vector<std::complex<double>> c;

  std::complex<double>& at(int i, int m) { return c[static_cast<std::size_t>(i) * n_modes + m]; }
  const std::complex<double>& at(int i, int m) const {
    return c[static_cast<std::size_t>(i) * n_modes + m];
  }
};

// Batched real-to-complex transforms of all rings (FFTW). Not thread safe.
class AngularTransform {
 public:
  AngularTransform(int n_r, int n_theta);
  ~AngularTransform();
  AngularTransform(const AngularTransform&) = delete;
  AngularTransform& operator=(const AngularTransform&) = delete;

  void forward(std::span<const double> values, Spectrum& out) const;
  void inverse(const Spectrum& in, std::span<double> values) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(GridPtr grid);
  ScalarField(GridPtr grid, std::vector<double> values);

  template <class F>
  static ScalarField sample(const GridPtr& grid, F&& f) {
    ScalarField out(grid);
    for (int i = 0; i < grid->n_r(); ++i)
      for (int j = 0; j < grid->n_theta(); ++j) out(i, j) = f(grid->r(i), grid->theta(j));
    return out;
  }

  const PolarGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  bool empty() const { return !grid_; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator()(int i, int j) const { return values_[grid_->index(i, j)]; }
  double& operator()(int i, int j) { return values_[grid_->index(i, j)]; }
  double operator[](std::size_t k) const { return values_[k]; }
  double& operator[](std::size_t k) { return values_[k]; }

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double a);
  ScalarField& operator*=(const ScalarField& o);

  double max_abs() const;
  bool all_finite() const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);
ScalarField operator*(ScalarField a, const ScalarField& b);

// Cartesian components (u1, u2) at polar nodes. When the field is the perp-gradient
// of a known stream function, that function is carried along.
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(GridPtr grid);
  VectorField(ScalarField u1, ScalarField u2);

  const PolarGrid& grid() const { return u1_.grid(); }
  const GridPtr& grid_ptr() const { return u1_.grid_ptr(); }
  bool empty() const { return u1_.empty(); }

  const ScalarField& u1() const { return u1_; }
  const ScalarField& u2() const { return u2_; }
  ScalarField& u1() { return u1_; }
  ScalarField& u2() { return u2_; }

  const std::optional<ScalarField>& stream() const { return stream_; }
  void set_stream(std::optional<ScalarField> phi) { stream_ = std::move(phi); }

  ScalarField radial() const;
  ScalarField azimuthal() const;

  VectorField& operator+=(const VectorField& o);
  VectorField& operator-=(const VectorField& o);
  VectorField& operator*=(double a);

  double max_abs() const;
  bool all_finite() const;

 private:
  ScalarField u1_, u2_;
  std::optional<ScalarField> stream_;
};

VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(double s, VectorField a);
// Pointwise product with a scalar; drops the stream function.
VectorField operator*(const ScalarField& s, const VectorField& a);

// L2 norm of the trace on r = 1 (both components).
double boundary_trace_norm(const VectorField& u);

}  // namespace sgflow
