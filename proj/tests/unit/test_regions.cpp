#include "aifdom/errors.hpp"
#include "aifdom/regions.hpp"
#include "support/scenarios.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace aifdom;
using namespace aifdom::testing;

namespace {

Trajectory constant_trajectory(const Vector& c, int n = 200) {
  Trajectory tr;
  for (int i = 0; i < n; ++i) {
    tr.times.push_back(0.1 * i);
    tr.states.push_back(c);
  }
  return tr;
}

Trajectory circle_trajectory(Point2 centre, double radius, int n = 400) {
  Trajectory tr;
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * M_PI * i / n;
    Vector s(4);
    s << centre.x() + radius * std::cos(a), centre.y() + radius * std::sin(a), 1.0, 1.0;
    tr.times.push_back(0.01 * i);
    tr.states.push_back(s);
  }
  return tr;
}

}  // namespace

TEST(ConvexHull, DropsInteriorAndCollinear) {
  const auto h = convex_hull({{0, 0}, {1, 0}, {2, 0}, {2, 2}, {0, 2}, {1, 1}, {1, 2}});
  EXPECT_EQ(h.size(), 4u);
  EXPECT_EQ(convex_hull({{1, 1}, {1, 1}}).size(), 1u);
  EXPECT_EQ(convex_hull({{0, 0}, {1, 1}, {2, 2}}).size(), 2u);
}

TEST(HullOfTrajectory, PointWithMargin) {
  Vector c(4);
  c << 2.0, 0.1, 2.0, 2.0;
  const Region r = hull_of_trajectory(constant_trajectory(c), {0, 1}, 0.5, 0.0);
  double xmin = 1e9, xmax = -1e9, ymin = 1e9, ymax = -1e9;
  for (const Point2& v : r.z_polytope) {
    xmin = std::min(xmin, v.x());
    xmax = std::max(xmax, v.x());
    ymin = std::min(ymin, v.y());
    ymax = std::max(ymax, v.y());
  }
  EXPECT_NEAR(xmin, 1.5, 1e-12);
  EXPECT_NEAR(xmax, 2.5, 1e-12);
  EXPECT_NEAR(ymin, 0.0, 1e-12);  // clipped at the axis
  EXPECT_NEAR(ymax, 0.6, 1e-12);
  EXPECT_EQ(r.shape(), PolytopeShape::polygon);
}

TEST(HullOfTrajectory, ZeroMarginPassesThroughExtremes) {
  const Trajectory tr = circle_trajectory({2.0, 2.0}, 1.0, 8);
  const Region r = hull_of_trajectory(tr, {0, 1}, 0.0, 0.0);
  EXPECT_EQ(r.z_polytope.size(), 8u);
  for (const Vector& s : tr.states) EXPECT_TRUE(contains(r, s));
}

TEST(HullOfTrajectory, LimitCycleContained) {
  const Scenario s = oscillatory_scenario(4.0, 1.0);
  const Region r = hull_of_trajectory(s.traj, {0, 1}, 0.1);
  const std::size_t w0 = s.traj.window_start(0.5);
  for (std::size_t i = w0; i < s.traj.size(); i += 7) EXPECT_TRUE(contains(r, s.traj.states[i]));
}

TEST(HullOfTrajectory, ContainmentMonotoneInMargin) {
  const Trajectory tr = circle_trajectory({2.0, 2.0}, 1.0);
  const Region small = hull_of_trajectory(tr, {0, 1}, 0.1, 0.0);
  const Region large = hull_of_trajectory(tr, {0, 1}, 0.4, 0.0);
  for (const Point2& v : small.z_polytope) {
    Vector xi(4);
    xi << v.x(), v.y(), 1.0, 1.0;
    EXPECT_TRUE(contains(large, xi));
  }
}

TEST(HullOfTrajectory, NegativeMarginRejected) {
  EXPECT_THROW(hull_of_trajectory(circle_trajectory({2, 2}, 1), {0, 1}, -0.1), RegionError);
}

TEST(CircumscribedPolygon, ContainsOriginal) {
  std::vector<Point2> pts;
  for (int i = 0; i < 500; ++i) {
    const double a = 2.0 * M_PI * i / 500;
    pts.emplace_back(3.0 + std::cos(a), 3.0 + 0.5 * std::sin(a));
  }
  const auto hull = convex_hull(pts);
  const auto outer = circumscribed_polygon(hull, 32);
  EXPECT_LE(outer.size(), 32u);
  Region r;
  r.z_polytope = outer;
  for (const Point2& p : hull) {
    Vector xi(2);
    xi << p.x(), p.y();
    EXPECT_TRUE(contains(r, xi));
  }
  EXPECT_EQ(circumscribed_polygon(convex_hull({{0, 0}, {1, 0}, {0, 1}}), 32).size(), 3u);
}

TEST(Vertices, LinearPlantUsesPolygonOnly) {
  const SystemModel m = fop_closed_loop(kController, fop_params(1.0, 1.0));
  Region r;
  r.z_polytope = {{1, 0}, {3, 0}, {3, 1}, {1, 1}};
  EXPECT_EQ(vertices(r, m).size(), 4u);
  r.params.eta = Interval{7.0, 13.0};
  EXPECT_EQ(vertices(r, m).size(), 8u);
}

TEST(Vertices, AllSeqNeedsBoundedPlantStates) {
  const SystemModel m = all_seq_closed_loop(kController, AllSeqPlantParams{1, 1, 1, 1}, 4.0);
  Region r;
  r.z_polytope = {{1, 0}, {3, 0}, {3, 1}, {1, 1}};
  EXPECT_THROW(vertices(r, m), RegionError);
  r.x_box[2] = {0.5, 1.5};
  r.x_box[3] = {0.5, 1.5};
  EXPECT_EQ(vertices(r, m).size(), 16u);
}

TEST(Contains, BoundaryAndQuadrant) {
  Region r;
  r.z_polytope = {{0, 0}, {3, 0}, {3, 1}, {0, 1}};
  Vector v(4);
  v << 3.0, 1.0, 5.0, 5.0;
  EXPECT_TRUE(contains(r, v));
  v << 2.0, 0.1, 2.0, 2.0;
  EXPECT_TRUE(contains(r, v));
  v << -0.1, 0.5, 0.0, 0.0;
  EXPECT_FALSE(contains(r, v));
}

TEST(Region, ValidateRejectsBadInput) {
  Region r;
  EXPECT_THROW(r.validate(), RegionError);
  r.z_polytope = {{0, 0}, {0, 1}, {1, 0}};  // clockwise
  EXPECT_THROW(r.validate(), RegionError);
  r.z_polytope = {{0, 0}, {1, 0}, {0, 1}};
  EXPECT_NO_THROW(r.validate());
  r.params.eta = Interval{2.0, 1.0};
  EXPECT_THROW(r.validate(), RegionError);
}

TEST(ResolveParams, HillSlopeInterval) {
  const SystemModel m = fop_closed_loop(kController, fop_params(1.0, 1.0), kHillB);
  Region r;
  r.z_polytope = {{0.1, 0}, {1, 0}, {1, 1}, {0.1, 1}};
  const Region resolved = resolve_params(r, m);
  ASSERT_TRUE(resolved.params.actuation_slope.has_value());
  const Interval s = *resolved.params.actuation_slope;
  EXPECT_NEAR(s.hi, hill_max_slope(kHillB).slope, 1e-9);
  EXPECT_NEAR(s.lo, hill_value_and_derivative(1.0, kHillB).slope, 1e-9);
}

TEST(InteriorGrid, PointsInside) {
  Region r;
  r.z_polytope = {{0, 0}, {2, 0}, {0, 2}};
  const auto pts = interior_grid(r, 10);
  EXPECT_FALSE(pts.empty());
  for (const Point2& p : pts) EXPECT_LE(p.x() + p.y(), 2.0 + 1e-12);
}
