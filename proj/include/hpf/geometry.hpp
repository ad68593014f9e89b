#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "hpf/errors.hpp"
#include "hpf/vec3.hpp"

namespace hpf {

/// Non-empty set of generator points whose convex hull forms the
/// restrictive volume. Duplicates are allowed.
class PointSet {
 public:
  PointSet(std::vector<Point3> points) : points_(std::move(points)) {
    if (points_.empty()) {
      throw InvalidInput("point set must contain at least one point");
    }
    for (const auto& p : points_) {
      if (!is_finite(p)) throw InvalidInput("point set contains a non-finite point");
    }
  }
  PointSet(std::initializer_list<Point3> points)
      : PointSet(std::vector<Point3>(points)) {}

  std::span<const Point3> points() const { return points_; }
  std::size_t size() const { return points_.size(); }

 private:
  std::vector<Point3> points_;
};

/// conv(generators) inflated by a ball of `radius`. Membership is closed.
struct HapticField {
  PointSet generators;
  double radius;

  HapticField(PointSet gens, double r) : generators(std::move(gens)), radius(r) {
    if (!(radius >= 0.0) || !std::isfinite(radius)) {
      throw InvalidInput("haptic field radius must be finite and >= 0");
    }
  }
};

namespace detail {

struct SimplexProjection {
  Vec3 closest;
  std::array<Vec3, 4> support{};
  int count = 0;
};

// Projects the origin onto every face of the simplex (vertices given relative
// to the query point) and keeps the nearest projection whose barycentric
// coordinates are all non-negative. The face set is tiny (at most 15), so
// exhaustive enumeration is cheaper than Voronoi-region bookkeeping.
inline SimplexProjection closest_on_simplex(std::span<const Vec3> w) {
  SimplexProjection best;
  double best_sq = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(w.size());
  for (int mask = 1; mask < (1 << n); ++mask) {
    std::array<Vec3, 4> face{};
    int m = 0;
    for (int i = 0; i < n; ++i) {
      if (mask & (1 << i)) face[m++] = w[i];
    }
    // x = face[0] + sum_j mu_j (face[j] - face[0]); minimize |x|^2.
    const int k = m - 1;
    std::array<double, 3> mu{};
    if (k > 0) {
      std::array<Vec3, 3> e{};
      for (int j = 0; j < k; ++j) e[j] = face[j + 1] - face[0];
      double g[3][4] = {};
      double scale = 0.0;
      for (int r = 0; r < k; ++r) {
        for (int c = 0; c < k; ++c) g[r][c] = dot(e[r], e[c]);
        g[r][k] = -dot(e[r], face[0]);
        scale = std::max(scale, g[r][r]);
      }
      // Gaussian elimination with partial pivoting on the k x k Gram system.
      bool singular = false;
      for (int col = 0; col < k && !singular; ++col) {
        int piv = col;
        for (int r = col + 1; r < k; ++r) {
          if (std::abs(g[r][col]) > std::abs(g[piv][col])) piv = r;
        }
        if (std::abs(g[piv][col]) <= 1e-13 * scale) {
          singular = true;
          break;
        }
        if (piv != col) {
          for (int c = 0; c <= k; ++c) std::swap(g[piv][c], g[col][c]);
        }
        for (int r = col + 1; r < k; ++r) {
          const double f = g[r][col] / g[col][col];
          for (int c = col; c <= k; ++c) g[r][c] -= f * g[col][c];
        }
      }
      if (singular) continue;
      for (int r = k - 1; r >= 0; --r) {
        double s = g[r][k];
        for (int c = r + 1; c < k; ++c) s -= g[r][c] * mu[c];
        mu[r] = s / g[r][r];
      }
      double lambda0 = 1.0;
      bool inside = true;
      for (int j = 0; j < k; ++j) {
        lambda0 -= mu[j];
        if (mu[j] < 0.0) inside = false;
      }
      if (lambda0 < 0.0) inside = false;
      if (!inside) continue;
    }
    Vec3 x = face[0];
    for (int j = 0; j < k; ++j) x += mu[j] * (face[j + 1] - face[0]);
    const double sq = squared_norm(x);
    if (sq < best_sq) {
      best_sq = sq;
      best.closest = x;
      best.count = m;
      best.support = face;
    }
  }
  return best;
}

}  // namespace detail

/// Convergence controls for convex_hull_distance.
struct HullDistanceOptions {
  double tolerance = 1e-9;  // meters, on the duality gap
  int max_iterations = 10'000;
};

/// Euclidean distance from `q` to conv(P); zero when `q` lies inside.
///
/// GJK-style iteration on the support function of P: keep a simplex of at
/// most four support points, project the query onto it, and add the support
/// point in the direction of the query until the duality gap falls below
/// the tolerance. Exact for single-point sets.
inline double convex_hull_distance(const Point3& q, const PointSet& set,
                                   HullDistanceOptions opts = {}) {
  if (!is_finite(q)) throw InvalidInput("query point must be finite");
  const auto pts = set.points();
  if (pts.size() == 1) return norm(pts[0] - q);

  std::array<Vec3, 4> simplex{};
  int count = 1;
  simplex[0] = pts[0] - q;
  Vec3 v = simplex[0];
  double best = norm(v);

  for (int it = 0; it < opts.max_iterations; ++it) {
    const double vv = squared_norm(v);
    if (vv <= 1e-24) return 0.0;
    const double vn = std::sqrt(vv);

    Vec3 w = pts[0] - q;
    double wv = dot(w, v);
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const Vec3 cand = pts[i] - q;
      const double cv = dot(cand, v);
      if (cv < wv) {
        wv = cv;
        w = cand;
      }
    }
    // v.w / |v| is a lower bound on the distance.
    if (vn - wv / vn <= opts.tolerance) return vn;

    bool repeated = false;
    for (int i = 0; i < count; ++i) {
      if (simplex[i] == w) repeated = true;
    }
    if (repeated) return vn;

    simplex[count++] = w;
    const auto proj = detail::closest_on_simplex(std::span<const Vec3>(simplex.data(), count));
    const double next = norm(proj.closest);
    if (next >= best) return best;  // no progress: numerically converged
    best = next;
    v = proj.closest;
    simplex = proj.support;
    count = proj.count;
    if (count == 4) return 0.0;  // origin strictly inside a tetrahedron
  }
  return best;
}

/// Closed membership test for the Minkowski sum conv(P) + B(radius).
inline bool hpf_contains(const Point3& q, const HapticField& field) {
  return convex_hull_distance(q, field.generators) <= field.radius;
}

inline double tcp_hand_distance(const Point3& tcp, const Point3& hand) {
  return norm(hand - tcp);
}

}  // namespace hpf
