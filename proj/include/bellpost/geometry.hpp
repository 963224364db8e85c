#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace bellpost {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

// Sign of the orientation determinant of (a, b, c): +1 for a left turn
// (counterclockwise), -1 for a right turn, 0 for collinear. Exact for all finite
// double inputs: a floating filter decides the clear cases and an exact rational
// evaluation handles the rest.
inline int orient2d(const Point2& a, const Point2& b, const Point2& c) {
  const double left = (b.x - a.x) * (c.y - a.y);
  const double right = (b.y - a.y) * (c.x - a.x);
  const double det = left - right;
  constexpr double eps = std::numeric_limits<double>::epsilon() * 0.5;
  constexpr double bound = (3.0 + 16.0 * eps) * eps;
  const double err = bound * (std::fabs(left) + std::fabs(right));
  if (det > err) return 1;
  if (-det > err) return -1;

  using boost::multiprecision::cpp_rational;
  const cpp_rational ax(a.x), ay(a.y), bx(b.x), by(b.y), cx(c.x), cy(c.y);
  const cpp_rational exact = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
  return exact > 0 ? 1 : (exact < 0 ? -1 : 0);
}

// Convex hull by Andrew's monotone chain. Vertices are returned counterclockwise
// starting from the lexicographically smallest point; collinear boundary points
// and duplicates are dropped and the first vertex is not repeated.
inline std::vector<Point2> convex_hull(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end(),
            [](const Point2& l, const Point2& r) { return l.x < r.x || (l.x == r.x && l.y < r.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;

  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && orient2d(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {
    while (k >= lower && orient2d(hull[k - 2], hull[k - 1], *it) <= 0) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);
  return hull;
}

// True when every consecutive triple turns left.
inline bool is_strictly_convex_ccw(std::span<const Point2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return true;
  for (std::size_t i = 0; i < n; ++i)
    if (orient2d(poly[i], poly[(i + 1) % n], poly[(i + 2) % n]) <= 0) return false;
  return true;
}

// Closed containment test for a counterclockwise convex polygon (boundary counts
// as inside). Degenerate hulls of one or two points contain only their segment.
inline bool hull_contains(std::span<const Point2> hull, const Point2& p) {
  const std::size_t n = hull.size();
  if (n == 0) return false;
  if (n == 1) return hull[0] == p;
  if (n == 2) {
    if (orient2d(hull[0], hull[1], p) != 0) return false;
    return std::min(hull[0].x, hull[1].x) <= p.x && p.x <= std::max(hull[0].x, hull[1].x) &&
           std::min(hull[0].y, hull[1].y) <= p.y && p.y <= std::max(hull[0].y, hull[1].y);
  }
  for (std::size_t i = 0; i < n; ++i)
    if (orient2d(hull[i], hull[(i + 1) % n], p) < 0) return false;
  return true;
}

}  // namespace bellpost
