#include "sgflow/cutoff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sgflow {

CutoffProfile parse_cutoff_profile(std::string_view name) {
  if (name == "quintic") return CutoffProfile::quintic;
  if (name == "septic") return CutoffProfile::septic;
  if (name == "smooth") return CutoffProfile::smooth;
  throw std::invalid_argument("unknown cutoff profile '" + std::string(name) + "'");
}

std::string_view to_string(CutoffProfile p) {
  switch (p) {
    case CutoffProfile::quintic: return "quintic";
    case CutoffProfile::septic: return "septic";
    case CutoffProfile::smooth: return "smooth";
  }
  return "quintic";
}

double cutoff_value(double r, double n, CutoffProfile profile) {
  if (!(n > 0.0)) throw std::invalid_argument("cutoff scale must be positive");
  const double lo = 0.5 * n;
  if (r <= lo) return 1.0;
  if (r >= n) return 0.0;
  const double s = (r - lo) / lo;
  double step = 0.0;
  switch (profile) {
    case CutoffProfile::quintic:
      step = s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
      break;
    case CutoffProfile::septic:
      step = s * s * s * s * (35.0 + s * (-84.0 + s * (70.0 - 20.0 * s)));
      break;
    case CutoffProfile::smooth: {
      const double a = std::exp(-1.0 / s);
      const double b = std::exp(-1.0 / (1.0 - s));
      step = a / (a + b);
      break;
    }
  }
  return std::clamp(1.0 - step, 0.0, 1.0);
}

ScalarField cutoff_field(double n, const GridPtr& grid, CutoffProfile profile) {
  ScalarField out(grid);
  for (int i = 0; i < grid->n_r(); ++i) {
    const double v = cutoff_value(grid->r(i), n, profile);
    for (int j = 0; j < grid->n_theta(); ++j) out(i, j) = v;
  }
  return out;
}

Mollifier::Mollifier(GridPtr grid, double eps) : grid_(std::move(grid)), eps_(eps) {
  const auto& g = *grid_;
  if (!(eps >= 2.0 * g.cell_width(0)))
    throw std::invalid_argument("mollifier width " + std::to_string(eps) +
                                " is below two wall cell widths (" +
                                std::to_string(2.0 * g.cell_width(0)) + ")");
  const int nr = g.n_r();
  const int nt = g.n_theta();
  const double eps2 = eps * eps;

  struct Raw {
    int src;
    int offset;
    double k;
  };
  std::vector<std::vector<Raw>> raw(nr);
  for (int i = 0; i < nr; ++i) {
    for (int s = 0; s < nr; ++s) {
      const double dr = g.r(i) - g.r(s);
      if (std::abs(dr) >= eps) continue;
      for (int d = -nt / 2 + 1; d <= nt / 2; ++d) {
        const double dist2 = g.r(i) * g.r(i) + g.r(s) * g.r(s) -
                             2.0 * g.r(i) * g.r(s) * std::cos(d * g.dtheta());
        if (dist2 >= eps2) continue;
        const double t = 1.0 - dist2 / eps2;
        raw[i].push_back({s, d, t * t * t});
      }
    }
  }
  // Symmetric Sinkhorn scaling per ring: J = S K S W has unit row sums (so it does not raise
  // the maximum) and, K being symmetric, unit weighted column sums (so it preserves the
  // quadrature integral).
  std::vector<double> scale(nr, 1.0);
  auto row_sum = [&](int i) {
    double acc = 0.0;
    for (const auto& t : raw[i]) acc += t.k * g.weight(t.src) * scale[t.src];
    return acc;
  };
  for (int it = 0; it < 1000; ++it) {
    double worst = 0.0;
    for (int i = 0; i < nr; ++i) worst = std::max(worst, std::abs(scale[i] * row_sum(i) - 1.0));
    if (worst < 1e-15) break;
    std::vector<double> next(nr);
    for (int i = 0; i < nr; ++i) next[i] = std::sqrt(scale[i] / row_sum(i));
    scale = std::move(next);
  }
  taps_.resize(nr);
  for (int i = 0; i < nr; ++i)
    for (const auto& t : raw[i])
      taps_[i].push_back({t.src, t.offset, scale[i] * t.k * scale[t.src] * g.weight(t.src)});
}

ScalarField Mollifier::apply(const ScalarField& f) const {
  const auto& g = *grid_;
  const int nt = g.n_theta();
  ScalarField out(grid_);
  for (int i = 0; i < g.n_r(); ++i) {
    for (const auto& tap : taps_[i]) {
      const double* src = f.values().data() + g.index(tap.ring, 0);
      double* dst = out.values().data() + g.index(i, 0);
      for (int j = 0; j < nt; ++j) {
        int js = j + tap.offset;
        if (js < 0) js += nt;
        if (js >= nt) js -= nt;
        dst[j] += tap.weight * src[js];
      }
    }
  }
  return out;
}

ScalarField mollify(const ScalarField& f, double eps) { return Mollifier(f.grid_ptr(), eps).apply(f); }

}  // namespace sgflow
