#include <catch_amalgamated.hpp>

#include <cmath>

#include "bellpost/geometry.hpp"
#include "bellpost/random.hpp"

using namespace bellpost;

TEST_CASE("orientation predicate") {
  CHECK(orient2d({0, 0}, {1, 0}, {0, 1}) == 1);
  CHECK(orient2d({0, 0}, {0, 1}, {1, 0}) == -1);
  CHECK(orient2d({0, 0}, {1, 1}, {2, 2}) == 0);
  // Nearly collinear inputs where naive floating evaluation is unreliable.
  const double e = std::ldexp(1.0, -52);
  CHECK(orient2d({0.5, 0.5}, {12, 12}, {24, 24}) == 0);
  CHECK(orient2d({0.5 + e, 0.5}, {12, 12}, {24, 24}) == -1);
  CHECK(orient2d({0.5, 0.5 + e}, {12, 12}, {24, 24}) == 1);
}

TEST_CASE("convex hull drops collinear and duplicate points") {
  std::vector<Point2> pts;
  for (int i = 0; i <= 4; ++i)
    for (int j = 0; j <= 4; ++j) pts.push_back({static_cast<double>(i), static_cast<double>(j)});
  pts.push_back({2, 2});
  const auto h = convex_hull(pts);
  CHECK(h.size() == 4);
  CHECK(is_strictly_convex_ccw(h));
  CHECK(convex_hull({{1, 1}, {1, 1}}) == std::vector<Point2>{{1, 1}});
  CHECK(convex_hull({{0, 0}, {1, 1}, {2, 2}}).size() == 2);
}

TEST_CASE("hull containment is closed") {
  const auto h = convex_hull({{0, 0}, {2, 0}, {2, 2}, {0, 2}});
  CHECK(hull_contains(h, {1, 1}));
  CHECK(hull_contains(h, {2, 1}));
  CHECK(hull_contains(h, {0, 0}));
  CHECK_FALSE(hull_contains(h, {2.0000001, 1}));
  const auto seg = convex_hull({{0, 0}, {2, 2}});
  CHECK(hull_contains(seg, {1, 1}));
  CHECK_FALSE(hull_contains(seg, {1, 1.5}));
  CHECK_FALSE(hull_contains(seg, {3, 3}));
}

TEST_CASE("random hulls are convex and contain their inputs") {
  SplitMix64 rng(1);
  for (int t = 0; t < 100; ++t) {
    std::vector<Point2> pts;
    const int n = 3 + static_cast<int>(rng.next() % 40);
    for (int i = 0; i < n; ++i) pts.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    const auto h = convex_hull(pts);
    CHECK(is_strictly_convex_ccw(h));
    for (const auto& p : pts) CHECK(hull_contains(h, p));
  }
}
