#pragma once

#include <string_view>
#include <vector>

#include "sgflow/grid.hpp"

namespace sgflow {

// Transition profile of the radial cutoff between r = n/2 and r = n.
// quintic and septic are C2 and C3 smoothsteps; smooth is the C-infinity exp(-1/s) blend.
enum class CutoffProfile { quintic, septic, smooth };

CutoffProfile parse_cutoff_profile(std::string_view name);
std::string_view to_string(CutoffProfile p);

// 1 for r <= n/2, 0 for r >= n, monotone in between.
double cutoff_value(double r, double n, CutoffProfile profile = CutoffProfile::quintic);
ScalarField cutoff_field(double n, const GridPtr& grid,
                         CutoffProfile profile = CutoffProfile::quintic);

// Convolution with the kernel (1 - |x|^2 / eps^2)^3, scaled symmetrically so that the
// quadrature integral is preserved exactly and the maximum never increases. The kernel is rotation invariant on the grid,
// so it is stored per (target ring, source ring, angular offset).
class Mollifier {
 public:
  Mollifier(GridPtr grid, double eps);

  double eps() const noexcept { return eps_; }
  ScalarField apply(const ScalarField& f) const;

 private:
  struct Tap {
    int ring;
    int offset;
    double weight;
  };
  GridPtr grid_;
  double eps_;
  std::vector<std::vector<Tap>> taps_;  // per target ring
};

ScalarField mollify(const ScalarField& f, double eps);

}  // namespace sgflow
