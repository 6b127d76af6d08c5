#include "sgflow/norms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "sgflow/operators.hpp"

namespace sgflow {

namespace {

int last_ring(const PolarGrid& g, double r_limit) {
  if (!(r_limit < g.r_max())) return g.n_r() - 1;
  int i = g.ring_below(r_limit);
  if (g.r(i) > r_limit) return -1;
  return i;
}

template <class F>
double weighted_sum(const PolarGrid& g, double r_limit, F&& node_value) {
  const int last = last_ring(g, r_limit);
  double total = 0.0;
  for (int i = 0; i <= last; ++i) {
    double ring = 0.0;
    for (int j = 0; j < g.n_theta(); ++j) ring += node_value(g.index(i, j));
    total += g.weight(i) * ring;
  }
  return total;
}

void check_order(int s) {
  if (s < 0 || s > PolarGrid::kMaxSobolevOrder)
    throw std::invalid_argument("Sobolev order " + std::to_string(s) +
                                " outside the supported range [0, " +
                                std::to_string(PolarGrid::kMaxSobolevOrder) + "]");
}

double squared_seminorms_upto(const ScalarField& f, int s, double r_limit, int k_min) {
  if (s == 0) return k_min == 0 ? std::pow(sobolev_norm(f, SobolevOrder::l2(), r_limit), 2) : 0.0;
  const auto table = derivative_table(f, s);
  double acc = 0.0;
  for (int k = k_min; k <= s; ++k)
    for (const auto& d : table[k]) acc += inner(d, d, r_limit);
  return acc;
}

struct Point {
  double x, y;
};

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Innermost and outermost support node on each ray; nodes between them lie on the segment
// joining the two, so the convex hull is unchanged.
std::vector<Point> support_points(const ScalarField& q, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("support threshold must be positive");
  const auto& g = q.grid();
  std::vector<Point> pts;
  for (int j = 0; j < g.n_theta(); ++j) {
    int lo = -1, hi = -1;
    for (int i = 0; i < g.n_r(); ++i)
      if (std::abs(q(i, j)) > threshold) {
        if (lo < 0) lo = i;
        hi = i;
      }
    if (lo < 0) continue;
    pts.push_back({g.r(lo) * g.cos_theta(j), g.r(lo) * g.sin_theta(j)});
    if (hi != lo) pts.push_back({g.r(hi) * g.cos_theta(j), g.r(hi) * g.sin_theta(j)});
  }
  return pts;
}

}  // namespace

double integrate(const ScalarField& f, double r_limit) {
  const auto v = f.values();
  return weighted_sum(f.grid(), r_limit, [&](std::size_t k) { return v[k]; });
}

double inner(const ScalarField& f, const ScalarField& g, double r_limit) {
  const auto a = f.values();
  const auto b = g.values();
  return weighted_sum(f.grid(), r_limit, [&](std::size_t k) { return a[k] * b[k]; });
}

double inner(const VectorField& u, const VectorField& w, double r_limit) {
  return inner(u.u1(), w.u1(), r_limit) + inner(u.u2(), w.u2(), r_limit);
}

std::vector<std::vector<ScalarField>> derivative_table(const ScalarField& f, int s) {
  check_order(s);
  // Canonical order: d2 applied b times first, then d1 applied a times. by_b[b][a] holds
  // d1^a d2^b f; the head of each chain is differentiated with grad, which yields both the next
  // d1 entry and the head of the following chain from one set of polar partials.
  std::vector<std::vector<ScalarField>> by_b(s + 1);
  by_b[0].push_back(f);
  for (int b = 0; b <= s; ++b) {
    auto& chain = by_b[b];
    if (b < s) {
      VectorField gr = grad(chain.front());
      chain.push_back(std::move(gr.u1()));
      by_b[b + 1].push_back(std::move(gr.u2()));
    }
    while (static_cast<int>(chain.size()) + b <= s) chain.push_back(partial_x(chain.back()));
  }
  std::vector<std::vector<ScalarField>> table(s + 1);
  for (int k = 0; k <= s; ++k)
    for (int b = 0; b <= k; ++b) table[k].push_back(std::move(by_b[b][k - b]));
  return table;
}

double sobolev_norm(const ScalarField& f, SobolevOrder order, double r_limit) {
  const auto v = f.values();
  switch (order.kind) {
    case NormKind::L1:
      return weighted_sum(f.grid(), r_limit, [&](std::size_t k) { return std::abs(v[k]); });
    case NormKind::L2:
      return std::sqrt(weighted_sum(f.grid(), r_limit, [&](std::size_t k) { return v[k] * v[k]; }));
    case NormKind::Linf: {
      const auto& g = f.grid();
      const int last = last_ring(g, r_limit);
      double m = 0.0;
      for (int i = 0; i <= last; ++i)
        for (int j = 0; j < g.n_theta(); ++j) m = std::max(m, std::abs(f(i, j)));
      return m;
    }
    case NormKind::H:
      check_order(order.s);
      return std::sqrt(squared_seminorms_upto(f, order.s, r_limit, 0));
  }
  return 0.0;
}

double sobolev_norm(const VectorField& u, SobolevOrder order, double r_limit) {
  const auto a = u.u1().values();
  const auto b = u.u2().values();
  switch (order.kind) {
    case NormKind::L1:
      return weighted_sum(u.grid(), r_limit,
                          [&](std::size_t k) { return std::hypot(a[k], b[k]); });
    case NormKind::Linf: {
      const auto& g = u.grid();
      const int last = last_ring(g, r_limit);
      double m = 0.0;
      for (int i = 0; i <= last; ++i)
        for (int j = 0; j < g.n_theta(); ++j) {
          const auto k = g.index(i, j);
          m = std::max(m, std::hypot(a[k], b[k]));
        }
      return m;
    }
    case NormKind::L2:
    case NormKind::H: {
      const double x = sobolev_norm(u.u1(), order, r_limit);
      const double y = sobolev_norm(u.u2(), order, r_limit);
      return std::sqrt(x * x + y * y);
    }
  }
  return 0.0;
}

double sobolev_seminorm(const ScalarField& f, int k, double r_limit) {
  check_order(k);
  if (k == 0) return sobolev_norm(f, SobolevOrder::l2(), r_limit);
  return std::sqrt(squared_seminorms_upto(f, k, r_limit, k));
}

double sobolev_seminorm(const VectorField& u, int k, double r_limit) {
  const double x = sobolev_seminorm(u.u1(), k, r_limit);
  const double y = sobolev_seminorm(u.u2(), k, r_limit);
  return std::sqrt(x * x + y * y);
}

double default_support_threshold(const ScalarField& q) {
  const double m = q.max_abs();
  return m > 0.0 ? 1e-10 * m : std::numeric_limits<double>::min();
}

double support_outer_radius(const ScalarField& q, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("support threshold must be positive");
  const auto& g = q.grid();
  for (int i = g.n_r() - 1; i >= 0; --i)
    for (int j = 0; j < g.n_theta(); ++j)
      if (std::abs(q(i, j)) > threshold) return g.r(i);
  return 0.0;
}

double support_diameter(const ScalarField& q, double threshold) {
  auto pts = support_points(q, threshold);
  if (pts.size() < 2) return 0.0;
  std::sort(pts.begin(), pts.end(),
            [](const Point& a, const Point& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  // Monotone chain hull, then the farthest pair among hull vertices.
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k > 1 ? k - 1 : k);
  double best = 0.0;
  for (std::size_t a = 0; a < hull.size(); ++a)
    for (std::size_t b = a + 1; b < hull.size(); ++b)
      best = std::max(best, std::hypot(hull[a].x - hull[b].x, hull[a].y - hull[b].y));
  return best;
}

}  // namespace sgflow
