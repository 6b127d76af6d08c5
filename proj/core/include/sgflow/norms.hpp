#pragma once

#include <limits>
#include <vector>

#include "sgflow/grid.hpp"

namespace sgflow {

enum class NormKind { L1, L2, Linf, H };

struct SobolevOrder {
  NormKind kind = NormKind::L2;
  int s = 0;

  static constexpr SobolevOrder l1() { return {NormKind::L1, 0}; }
  static constexpr SobolevOrder l2() { return {NormKind::L2, 0}; }
  static constexpr SobolevOrder linf() { return {NormKind::Linf, 0}; }
  static constexpr SobolevOrder h(int s) { return {NormKind::H, s}; }
};

inline constexpr double kWholeDomain = std::numeric_limits<double>::infinity();

// Quadrature weighted by r dr dtheta; nodes with r > r_limit are skipped.
double integrate(const ScalarField& f, double r_limit = kWholeDomain);
double inner(const ScalarField& f, const ScalarField& g, double r_limit = kWholeDomain);
double inner(const VectorField& u, const VectorField& w, double r_limit = kWholeDomain);

double sobolev_norm(const ScalarField& f, SobolevOrder order, double r_limit = kWholeDomain);
double sobolev_norm(const VectorField& u, SobolevOrder order, double r_limit = kWholeDomain);

// (sum over |alpha| = k of ||D^alpha f||^2)^{1/2}.
double sobolev_seminorm(const ScalarField& f, int k, double r_limit = kWholeDomain);
double sobolev_seminorm(const VectorField& u, int k, double r_limit = kWholeDomain);

// All Cartesian partials d1^a d2^b f with a + b <= s; entry [k] lists |alpha| = k with b = 0..k.
std::vector<std::vector<ScalarField>> derivative_table(const ScalarField& f, int s);

double default_support_threshold(const ScalarField& q);
double support_diameter(const ScalarField& q, double threshold);
double support_outer_radius(const ScalarField& q, double threshold);

}  // namespace sgflow
