#include "aifdom/regions.hpp"

#include "aifdom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

namespace aifdom {

namespace {

constexpr double kHalfPlaneTol = 1e-12;

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

double dist_to_segment(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

bool polygon_contains(const std::vector<Point2>& poly, const Point2& p) {
  if (poly.empty()) return false;
  if (poly.size() == 1) return (p - poly[0]).norm() <= kHalfPlaneTol;
  if (poly.size() == 2) return dist_to_segment(p, poly[0], poly[1]) <= kHalfPlaneTol;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2& a = poly[i];
    const Point2& b = poly[(i + 1) % poly.size()];
    // Normalised edge test so the tolerance is a distance.
    const double len = (b - a).norm();
    if (cross(a, b, p) / len < -kHalfPlaneTol) return false;
  }
  return true;
}

// Removes vertices closer than tol to the chord of their neighbours.
std::vector<Point2> drop_near_collinear(std::vector<Point2> poly, double tol) {
  bool changed = true;
  while (changed && poly.size() > 3) {
    changed = false;
    for (std::size_t i = 0; i < poly.size() && poly.size() > 3; ++i) {
      const Point2& a = poly[(i + poly.size() - 1) % poly.size()];
      const Point2& c = poly[(i + 1) % poly.size()];
      const double len = (c - a).norm();
      if (len > 0.0 && cross(a, c, poly[i]) / len > -tol && cross(a, c, poly[i]) / len < tol) {
        poly.erase(poly.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
      }
    }
  }
  return poly;
}

Point2 project(const Vector& xi, const std::array<int, 2>& c) { return {xi[c[0]], xi[c[1]]}; }

}  // namespace

std::vector<Point2> convex_hull(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() <= 2) return pts;

  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

std::vector<Point2> clip_to_nonnegative(const std::vector<Point2>& poly, int axis) {
  std::vector<Point2> out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = poly[i];
    const Point2& b = poly[(i + 1) % n];
    const bool ina = a[axis] >= 0.0;
    const bool inb = b[axis] >= 0.0;
    if (ina) out.push_back(a);
    if (ina != inb) {
      const double t = a[axis] / (a[axis] - b[axis]);
      Point2 q = a + t * (b - a);
      q[axis] = 0.0;
      out.push_back(q);
    }
  }
  return out;
}

std::vector<Point2> circumscribed_polygon(const std::vector<Point2>& polygon, int n_directions) {
  if (n_directions < 3) throw RegionError("need at least 3 support directions");
  if (polygon.size() < 3 || polygon.size() <= static_cast<std::size_t>(n_directions)) return polygon;
  std::vector<Point2> dirs;
  std::vector<double> support;
  for (int k = 0; k < n_directions; ++k) {
    const double a = 2.0 * std::numbers::pi * k / n_directions;
    const Point2 d(std::cos(a), std::sin(a));
    double h = -std::numeric_limits<double>::infinity();
    for (const auto& v : polygon) h = std::max(h, d.dot(v));
    dirs.push_back(d);
    support.push_back(h);
  }
  std::vector<Point2> out;
  for (int k = 0; k < n_directions; ++k) {
    const int l = (k + 1) % n_directions;
    Eigen::Matrix2d m;
    m.row(0) = dirs[k].transpose();
    m.row(1) = dirs[l].transpose();
    const Point2 v = m.inverse() * Eigen::Vector2d(support[k], support[l]);
    if (out.empty() || (v - out.back()).norm() > 1e-12 * (1.0 + v.norm())) out.push_back(v);
  }
  if (out.size() > 1 && (out.front() - out.back()).norm() <= 1e-12 * (1.0 + out.front().norm())) {
    out.pop_back();
  }
  return convex_hull(std::move(out));
}

PolytopeShape Region::shape() const {
  if (z_polytope.size() == 1) return PolytopeShape::point;
  if (z_polytope.size() == 2) return PolytopeShape::segment;
  return PolytopeShape::polygon;
}

void Region::validate() const {
  if (z_polytope.empty()) throw RegionError("region polytope is empty");
  for (const auto& v : z_polytope) {
    if (!v.allFinite()) throw RegionError("region vertex is not finite");
    if (v.minCoeff() < 0.0) throw RegionError("region vertex outside the nonnegative quadrant");
  }
  if (z_polytope.size() >= 3) {
    for (std::size_t i = 0; i < z_polytope.size(); ++i) {
      const auto& a = z_polytope[i];
      const auto& b = z_polytope[(i + 1) % z_polytope.size()];
      const auto& c = z_polytope[(i + 2) % z_polytope.size()];
      if (cross(a, b, c) <= 0.0) {
        throw RegionError("region polytope is not convex and counterclockwise");
      }
    }
  }
  for (const auto& [idx, iv] : x_box) {
    if (iv.empty()) throw RegionError("empty state interval");
    if (iv.lo < 0.0) throw RegionError("state interval extends below zero");
    (void)idx;
  }
  if (params.eta && params.eta->empty()) throw RegionError("empty eta interval");
  if (params.actuation_slope && params.actuation_slope->empty()) {
    throw RegionError("empty actuation slope interval");
  }
}

double projected_diagonal(const Trajectory& traj, std::array<int, 2> coords,
                          double transient_fraction) {
  const std::size_t w0 = traj.window_start(transient_fraction);
  if (w0 >= traj.size()) throw RegionError("empty projection");
  Point2 lo = project(traj.states[w0], coords), hi = lo;
  for (std::size_t i = w0; i < traj.size(); ++i) {
    const Point2 p = project(traj.states[i], coords);
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

Region hull_of_trajectory(const Trajectory& traj, std::array<int, 2> coords, double margin,
                          double transient_fraction) {
  if (!(margin >= 0.0)) throw RegionError("margin must be nonnegative");
  const std::size_t w0 = traj.window_start(transient_fraction);
  if (traj.size() == 0 || w0 >= traj.size()) throw RegionError("empty projection");

  std::vector<Point2> pts;
  pts.reserve(traj.size() - w0);
  for (std::size_t i = w0; i < traj.size(); ++i) pts.push_back(project(traj.states[i], coords));
  std::vector<Point2> hull = convex_hull(std::move(pts));

  if (margin > 0.0) {
    std::vector<Point2> inflated;
    inflated.reserve(4 * hull.size());
    for (const auto& p : hull) {
      for (double dx : {-margin, margin}) {
        for (double dy : {-margin, margin}) inflated.emplace_back(p.x() + dx, p.y() + dy);
      }
    }
    hull = convex_hull(std::move(inflated));
    // Inflating a clustered hull leaves runs of nearly coincident vertices.
    hull = drop_near_collinear(std::move(hull), 1e-6 * margin);
  }
  if (hull.size() >= 3) {
    hull = clip_to_nonnegative(clip_to_nonnegative(hull, 0), 1);
    hull = convex_hull(std::move(hull));
  } else {
    for (auto& p : hull) p = p.cwiseMax(0.0);
  }

  Region r;
  r.coords = coords;
  r.z_polytope = std::move(hull);
  r.validate();
  return r;
}

std::map<int, Interval> box_of_trajectory(const Trajectory& traj, const std::vector<int>& coords,
                                          double margin, double transient_fraction) {
  const std::size_t w0 = traj.window_start(transient_fraction);
  if (w0 >= traj.size()) throw RegionError("empty projection");
  std::map<int, Interval> box;
  for (int c : coords) {
    double lo = traj.states[w0][c], hi = lo;
    for (std::size_t i = w0; i < traj.size(); ++i) {
      lo = std::min(lo, traj.states[i][c]);
      hi = std::max(hi, traj.states[i][c]);
    }
    box[c] = Interval{std::max(0.0, lo - margin), hi + margin};
  }
  return box;
}

Region resolve_params(const Region& region, const SystemModel& model) {
  Region r = region;
  if (model.actuation_slope_param && !r.params.actuation_slope) {
    // The actuator input is z1 (state 0).
    Interval u;
    if (r.coords[0] == 0 || r.coords[1] == 0) {
      const int axis = r.coords[0] == 0 ? 0 : 1;
      u.lo = u.hi = r.z_polytope.front()[axis];
      for (const auto& v : r.z_polytope) {
        u.lo = std::min(u.lo, v[axis]);
        u.hi = std::max(u.hi, v[axis]);
      }
    } else if (auto it = r.x_box.find(0); it != r.x_box.end()) {
      u = it->second;
    } else {
      throw RegionError("actuator input z1 must be bounded to derive the slope interval");
    }
    r.params.actuation_slope = model.actuation_slope_range(u);
  }
  if (r.params.eta && !model.supports_eta_param) {
    throw RegionError("model " + model.tag + " has no eta parameter");
  }
  if (r.params.actuation_slope && !model.actuation_slope_param) {
    throw RegionError("model " + model.tag + " has no actuation slope parameter");
  }
  return r;
}

std::vector<RegionVertex> vertices(const Region& region_in, const SystemModel& model) {
  region_in.validate();
  const Region region = resolve_params(region_in, model);

  std::set<int> active;
  for (int c : model.jacobian_state_deps) {
    if (c != region.coords[0] && c != region.coords[1]) active.insert(c);
  }

  Vector base = Vector::Zero(model.dim);
  for (const auto& [idx, iv] : region.x_box) {
    if (idx >= 0 && idx < model.dim) base[idx] = iv.mid();
  }

  std::vector<std::pair<int, Interval>> active_boxes;
  for (int c : active) {
    auto it = region.x_box.find(c);
    if (it == region.x_box.end()) {
      throw RegionError("state coordinate " + std::to_string(c + 1) +
                        " enters the Jacobian and needs a bound");
    }
    active_boxes.emplace_back(c, it->second);
  }

  std::vector<RegionVertex> out;
  out.push_back({base, ParamPoint{}});

  auto expand = [&out](auto&& assign, const Interval& iv) {
    std::vector<RegionVertex> next;
    next.reserve(out.size() * 2);
    for (const auto& v : out) {
      for (double val : {iv.lo, iv.hi}) {
        RegionVertex w = v;
        assign(w, val);
        next.push_back(std::move(w));
      }
    }
    out = std::move(next);
  };

  {
    std::vector<RegionVertex> next;
    for (const auto& p : region.z_polytope) {
      RegionVertex w = out.front();
      w.xi[region.coords[0]] = p.x();
      w.xi[region.coords[1]] = p.y();
      next.push_back(std::move(w));
    }
    out = std::move(next);
  }
  for (const auto& [c, iv] : active_boxes) {
    const int idx = c;
    expand([idx](RegionVertex& w, double val) { w.xi[idx] = val; }, iv);
  }
  if (region.params.eta) {
    expand([](RegionVertex& w, double val) { w.params.eta = val; }, *region.params.eta);
  }
  if (region.params.actuation_slope) {
    expand([](RegionVertex& w, double val) { w.params.actuation_slope = val; },
           *region.params.actuation_slope);
  }
  return out;
}

bool contains(const Region& region, const Vector& xi, const ParamPoint& params) {
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    if (!(xi[i] >= 0.0)) return false;
  }
  if (!polygon_contains(region.z_polytope, project(xi, region.coords))) return false;
  for (const auto& [idx, iv] : region.x_box) {
    if (idx < xi.size() && !iv.contains(xi[idx], kHalfPlaneTol)) return false;
  }
  if (params.eta && region.params.eta && !region.params.eta->contains(*params.eta, kHalfPlaneTol)) {
    return false;
  }
  if (params.actuation_slope && region.params.actuation_slope &&
      !region.params.actuation_slope->contains(*params.actuation_slope, kHalfPlaneTol)) {
    return false;
  }
  return true;
}

std::vector<Point2> interior_grid(const Region& region, int density) {
  std::vector<Point2> out;
  if (density <= 0 || region.z_polytope.empty()) return out;
  Point2 lo = region.z_polytope.front(), hi = lo;
  for (const auto& v : region.z_polytope) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  for (int i = 1; i <= density; ++i) {
    for (int j = 1; j <= density; ++j) {
      const Point2 p(lo.x() + (hi.x() - lo.x()) * i / (density + 1.0),
                     lo.y() + (hi.y() - lo.y()) * j / (density + 1.0));
      if (polygon_contains(region.z_polytope, p)) out.push_back(p);
    }
  }
  return out;
}

}  // namespace aifdom
