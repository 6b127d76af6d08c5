#pragma once

#include "sgflow/grid.hpp"

namespace sgflow {

// Radial derivatives are second-order differences in the mapped coordinate,
// angular derivatives are spectral (Nyquist mode dropped for odd orders).

ScalarField d_radial(const ScalarField& f);
ScalarField d_theta(const ScalarField& f);

ScalarField partial_x(const ScalarField& f);
ScalarField partial_y(const ScalarField& f);

VectorField grad(const ScalarField& f);
// (-d2 psi, d1 psi); the result carries psi as its stream function.
VectorField perp_grad(const ScalarField& psi);
// Polar form (1/r)[d_r(r u_r) + d_theta u_theta].
ScalarField div(const VectorField& u);
// -d2 u1 + d1 u2 in polar form (1/r)[d_r(r u_theta) - d_theta u_r].
ScalarField perp_div(const VectorField& u);
// Compact conservative radial stencil plus spectral angular part.
ScalarField laplacian(const ScalarField& f);
// Component-wise; a carried stream function is mapped through the scalar laplacian.
VectorField laplacian(const VectorField& u);

enum class DiffOp { grad, laplacian, perp_grad, div, perp_div };

}  // namespace sgflow
