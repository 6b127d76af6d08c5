#include "sgflow/operators.hpp"

#include <complex>

namespace sgflow {

namespace {

void apply_radial(const PolarGrid& g, std::span<const double> in, std::span<double> out,
                  bool second) {
  const int nt = g.n_theta();
  for (int i = 0; i < g.n_r(); ++i) {
    const RadialStencil& st = second ? g.lap_stencil(i) : g.d1_stencil(i);
    double* o = out.data() + g.index(i, 0);
    for (int j = 0; j < nt; ++j) o[j] = 0.0;
    for (int k = 0; k < st.len; ++k) {
      const double c = st.c[k];
      const double* src = in.data() + g.index(st.start + k, 0);
      for (int j = 0; j < nt; ++j) o[j] += c * src[j];
    }
  }
}

// Multiplies mode m by (i m)^order, zeroing the Nyquist mode for odd order.
ScalarField spectral_theta(const ScalarField& f, int order) {
  const auto& g = f.grid();
  Spectrum s;
  g.angular().forward(f.values(), s);
  const int nyq = g.n_theta() / 2;
  for (int i = 0; i < s.n_r; ++i) {
    for (int m = 0; m < s.n_modes; ++m) {
      auto& c = s.at(i, m);
      if (order % 2 == 1 && m == nyq) {
        c = 0.0;
        continue;
      }
      std::complex<double> factor = 1.0;
      for (int k = 0; k < order; ++k) factor *= std::complex<double>(0.0, m);
      c *= factor;
    }
  }
  ScalarField out(f.grid_ptr());
  g.angular().inverse(s, out.values());
  return out;
}

struct PolarPartials {
  ScalarField dr;
  ScalarField dt_over_r;
};

PolarPartials polar_partials(const ScalarField& f) {
  PolarPartials p{d_radial(f), d_theta(f)};
  const auto& g = f.grid();
  for (int i = 0; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) p.dt_over_r(i, j) /= g.r(i);
  return p;
}

}  // namespace

ScalarField d_radial(const ScalarField& f) {
  ScalarField out(f.grid_ptr());
  apply_radial(f.grid(), f.values(), out.values(), false);
  return out;
}

ScalarField d_theta(const ScalarField& f) { return spectral_theta(f, 1); }

ScalarField partial_x(const ScalarField& f) {
  auto p = polar_partials(f);
  const auto& g = f.grid();
  ScalarField out(f.grid_ptr());
  for (int i = 0; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j)
      out(i, j) = g.cos_theta(j) * p.dr(i, j) - g.sin_theta(j) * p.dt_over_r(i, j);
  return out;
}

ScalarField partial_y(const ScalarField& f) {
  auto p = polar_partials(f);
  const auto& g = f.grid();
  ScalarField out(f.grid_ptr());
  for (int i = 0; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j)
      out(i, j) = g.sin_theta(j) * p.dr(i, j) + g.cos_theta(j) * p.dt_over_r(i, j);
  return out;
}

VectorField grad(const ScalarField& f) {
  auto p = polar_partials(f);
  const auto& g = f.grid();
  VectorField out(f.grid_ptr());
  for (int i = 0; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const double c = g.cos_theta(j), s = g.sin_theta(j);
      out.u1()(i, j) = c * p.dr(i, j) - s * p.dt_over_r(i, j);
      out.u2()(i, j) = s * p.dr(i, j) + c * p.dt_over_r(i, j);
    }
  return out;
}

VectorField perp_grad(const ScalarField& psi) {
  auto p = polar_partials(psi);
  const auto& g = psi.grid();
  VectorField out(psi.grid_ptr());
  for (int i = 0; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) {
      const double c = g.cos_theta(j), s = g.sin_theta(j);
      const double d1 = c * p.dr(i, j) - s * p.dt_over_r(i, j);
      const double d2 = s * p.dr(i, j) + c * p.dt_over_r(i, j);
      out.u1()(i, j) = -d2;
      out.u2()(i, j) = d1;
    }
  out.set_stream(psi);
  return out;
}

namespace {

// (1/r)[d_r(r a) + sign * d_theta b]
ScalarField polar_combination(const ScalarField& a, const ScalarField& b, double sign) {
  const auto& g = a.grid();
  ScalarField ra(a.grid_ptr());
  for (int i = 0; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) ra(i, j) = g.r(i) * a(i, j);
  ScalarField out = d_radial(ra);
  const ScalarField tb = d_theta(b);
  for (int i = 0; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_theta(); ++j) out(i, j) = (out(i, j) + sign * tb(i, j)) / g.r(i);
  return out;
}

}  // namespace

ScalarField div(const VectorField& u) {
  return polar_combination(u.radial(), u.azimuthal(), 1.0);
}

ScalarField perp_div(const VectorField& u) {
  return polar_combination(u.azimuthal(), u.radial(), -1.0);
}

ScalarField laplacian(const ScalarField& f) {
  const auto& g = f.grid();
  ScalarField out(f.grid_ptr());
  apply_radial(g, f.values(), out.values(), true);
  Spectrum s;
  g.angular().forward(f.values(), s);
  for (int i = 0; i < s.n_r; ++i) {
    const double inv_r2 = 1.0 / (g.r(i) * g.r(i));
    for (int m = 0; m < s.n_modes; ++m) s.at(i, m) *= -static_cast<double>(m) * m * inv_r2;
  }
  ScalarField ang(f.grid_ptr());
  g.angular().inverse(s, ang.values());
  out += ang;
  return out;
}

VectorField laplacian(const VectorField& u) {
  VectorField out(laplacian(u.u1()), laplacian(u.u2()));
  if (u.stream()) out.set_stream(laplacian(*u.stream()));
  return out;
}

}  // namespace sgflow
