#pragma once

// Convex regions over which dominance is certified: a convex polygon in two
// state coordinates (normally the controller pair z1, z2), crossed with
// intervals on further state coordinates and on uncertain parameters.

#include "aifdom/circuit_models.hpp"
#include "aifdom/ode_sim.hpp"
#include "aifdom/types.hpp"

#include <array>
#include <map>
#include <optional>
#include <vector>

namespace aifdom {

using Point2 = Eigen::Vector2d;

/// Convex hull (Andrew's monotone chain), counterclockwise, collinear points
/// dropped. Returns 1 or 2 points for degenerate input.
std::vector<Point2> convex_hull(std::vector<Point2> points);

/// Clips a convex counterclockwise polygon to the half-plane coordinate >= 0.
std::vector<Point2> clip_to_nonnegative(const std::vector<Point2>& polygon, int axis);

/// Polygon circumscribing a convex counterclockwise polygon, bounded by its
/// support lines in n_directions equally spaced directions (axis directions
/// included when n_directions is a multiple of 4). Polygons with at most
/// n_directions vertices are returned unchanged.
std::vector<Point2> circumscribed_polygon(const std::vector<Point2>& polygon, int n_directions);

enum class PolytopeShape { point, segment, polygon };

struct ParamBox {
  std::optional<Interval> eta;
  std::optional<Interval> actuation_slope;
};

struct Region {
  std::array<int, 2> coords{0, 1};
  std::vector<Point2> z_polytope;
  /// Bounded state coordinates; coordinates absent from the map are unconstrained.
  std::map<int, Interval> x_box;
  ParamBox params;

  [[nodiscard]] PolytopeShape shape() const;
  /// Throws RegionError when an invariant is broken.
  void validate() const;
};

struct RegionVertex {
  Vector xi;
  ParamPoint params;
};

/// Convex hull of the projected post-transient samples, inflated by a square
/// of half-width `margin` (Minkowski sum) and clipped to the nonnegative
/// quadrant.
Region hull_of_trajectory(const Trajectory& traj, std::array<int, 2> coords, double margin,
                          double transient_fraction = 0.5);

/// Bounding box of the post-transient samples on `coords`, inflated by
/// `margin` and clipped at zero.
std::map<int, Interval> box_of_trajectory(const Trajectory& traj, const std::vector<int>& coords,
                                          double margin, double transient_fraction = 0.5);

/// Length of the bounding-box diagonal of the projected post-transient samples.
double projected_diagonal(const Trajectory& traj, std::array<int, 2> coords,
                          double transient_fraction = 0.5);

/// Fills in parameter intervals the model needs but the region leaves implicit:
/// the actuation slope range of a saturating actuator over the region's range
/// of the actuator input z1.
Region resolve_params(const Region& region, const SystemModel& model);

/// Cartesian product of polygon vertices with the corners of every interval
/// the Jacobian depends on. Coordinates the Jacobian ignores are set to the
/// box midpoint (or 0 when unconstrained).
std::vector<RegionVertex> vertices(const Region& region, const SystemModel& model);

/// Boundary-inclusive membership with tolerance 1e-12 in the half-plane tests.
bool contains(const Region& region, const Vector& xi, const ParamPoint& params = {});

/// Points of a density x density grid over the polygon's bounding box that lie
/// inside the polygon (strictly interior grid, excluding the box edges).
std::vector<Point2> interior_grid(const Region& region, int density);

}  // namespace aifdom
