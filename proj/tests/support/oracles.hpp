#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <vector>

namespace sgflow::oracle {

// Adaptive Gauss-Kronrod quadrature, used as an independent reference for grid quadrature.
template <class F>
double quad(F&& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

// Integral over the annulus 1 < r < r_max of a radial function, 2 pi int r f(r) dr.
template <class F>
double radial_integral(F&& f, double r_max) {
  return 2.0 * std::numbers::pi * quad([&](double r) { return r * f(r); }, 1.0, r_max);
}

// Dense polynomial with ascending coefficients; exact derivatives for symbolic oracles.
struct Poly {
  std::vector<double> c;

  double operator()(double x) const {
    double acc = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
    return acc;
  }
  Poly derivative() const {
    Poly d;
    for (std::size_t k = 1; k < c.size(); ++k) d.c.push_back(static_cast<double>(k) * c[k]);
    if (d.c.empty()) d.c.push_back(0.0);
    return d;
  }
  friend Poly operator*(const Poly& a, const Poly& b) {
    Poly out;
    out.c.assign(a.c.size() + b.c.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c.size(); ++i)
      for (std::size_t j = 0; j < b.c.size(); ++j) out.c[i + j] += a.c[i] * b.c[j];
    return out;
  }
  static Poly power(const Poly& p, int n) {
    Poly out{{1.0}};
    for (int k = 0; k < n; ++k) out = out * p;
    return out;
  }
};

// Radial Laplacian f'' + f'/r of a polynomial at r.
inline double radial_laplacian(const Poly& p, double r) {
  const Poly d1 = p.derivative();
  return d1.derivative()(r) + d1(r) / r;
}

inline double observed_order(double coarse_error, double fine_error) {
  return std::log2(coarse_error / fine_error);
}

}  // namespace sgflow::oracle
