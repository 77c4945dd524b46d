#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "crowdalloc/errors.hpp"
#include "crowdalloc/rng.hpp"

namespace crowdalloc {

// Planar coordinates are integers on a 10^-2 m grid in the projected plane.
// All incidence predicates below run in exact integer arithmetic, so there is
// no epsilon tuning anywhere in the graph construction.
inline constexpr double kUnitsPerMeter = 100.0;

struct PlanarPoint {
  std::int64_t x = 0;
  std::int64_t y = 0;

  friend bool operator==(const PlanarPoint&, const PlanarPoint&) = default;
  friend auto operator<=>(const PlanarPoint&, const PlanarPoint&) = default;
};

inline PlanarPoint point_from_meters(double mx, double my) {
  return {std::llround(mx * kUnitsPerMeter), std::llround(my * kUnitsPerMeter)};
}

inline double distance_units(const PlanarPoint& a, const PlanarPoint& b) {
  return std::hypot(static_cast<double>(a.x - b.x), static_cast<double>(a.y - b.y));
}

inline double distance_meters(const PlanarPoint& a, const PlanarPoint& b) {
  return distance_units(a, b) / kUnitsPerMeter;
}

struct PlanarPointHash {
  std::size_t operator()(const PlanarPoint& p) const {
    std::uint64_t h = static_cast<std::uint64_t>(p.x) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<std::uint64_t>(p.y) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

struct Segment {
  PlanarPoint a;
  PlanarPoint b;
};

enum class Orientation { CounterClockwise, Clockwise, Collinear };

inline int cross_sign(const PlanarPoint& p, const PlanarPoint& q, const PlanarPoint& r) {
  __int128 cross = static_cast<__int128>(q.x - p.x) * (r.y - p.y) -
                   static_cast<__int128>(q.y - p.y) * (r.x - p.x);
  return cross > 0 ? 1 : (cross < 0 ? -1 : 0);
}

// Sign of the cross product (q-p) x (r-p), exact for coordinates within
// +/- 2^31 grid units.
inline Orientation orientation(const PlanarPoint& p, const PlanarPoint& q, const PlanarPoint& r) {
  int s = cross_sign(p, q, r);
  if (s > 0) return Orientation::CounterClockwise;
  if (s < 0) return Orientation::Clockwise;
  return Orientation::Collinear;
}

enum class IntersectionKind { None, SharedEndpointOnly, ProperInterior, CollinearOverlap };

// p assumed collinear with s; true if p lies within s's bounding box.
inline bool collinear_point_on_segment(const PlanarPoint& p, const Segment& s) {
  return std::min(s.a.x, s.b.x) <= p.x && p.x <= std::max(s.a.x, s.b.x) &&
         std::min(s.a.y, s.b.y) <= p.y && p.y <= std::max(s.a.y, s.b.y);
}

inline bool point_on_segment(const PlanarPoint& p, const Segment& s) {
  return cross_sign(s.a, s.b, p) == 0 && collinear_point_on_segment(p, s);
}

// Exact classification of how two segments meet:
//   ProperInterior     - open interiors cross in a single point
//   SharedEndpointOnly - the single common point is an endpoint of at least
//                        one segment (corner contact or T-contact)
//   CollinearOverlap   - a common sub-segment of positive length
inline IntersectionKind classify_intersection(const Segment& s1, const Segment& s2) {
  int d1 = cross_sign(s2.a, s2.b, s1.a);
  int d2 = cross_sign(s2.a, s2.b, s1.b);
  int d3 = cross_sign(s1.a, s1.b, s2.a);
  int d4 = cross_sign(s1.a, s1.b, s2.b);

  if (d1 == 0 && d2 == 0) {
    // All four endpoints on one line: reduce to 1-D interval overlap along
    // the dominant axis of s2.
    bool use_x = std::llabs(s2.b.x - s2.a.x) >= std::llabs(s2.b.y - s2.a.y);
    auto key = [use_x](const PlanarPoint& p) { return use_x ? p.x : p.y; };
    std::int64_t lo1 = std::min(key(s1.a), key(s1.b));
    std::int64_t hi1 = std::max(key(s1.a), key(s1.b));
    std::int64_t lo2 = std::min(key(s2.a), key(s2.b));
    std::int64_t hi2 = std::max(key(s2.a), key(s2.b));
    std::int64_t lo = std::max(lo1, lo2);
    std::int64_t hi = std::min(hi1, hi2);
    if (lo > hi) return IntersectionKind::None;
    if (lo < hi) return IntersectionKind::CollinearOverlap;
    return IntersectionKind::SharedEndpointOnly;
  }

  if (d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0) {
    if (d1 != d2 && d3 != d4) return IntersectionKind::ProperInterior;
    return IntersectionKind::None;
  }

  if ((d1 == 0 && collinear_point_on_segment(s1.a, s2)) ||
      (d2 == 0 && collinear_point_on_segment(s1.b, s2)) ||
      (d3 == 0 && collinear_point_on_segment(s2.a, s1)) ||
      (d4 == 0 && collinear_point_on_segment(s2.b, s1))) {
    return IntersectionKind::SharedEndpointOnly;
  }
  return IntersectionKind::None;
}

// Convex hull with counterclockwise vertex order; collinear boundary points
// are excluded from the vertex list.
struct Hull {
  std::vector<PlanarPoint> vertices;

  std::vector<Segment> edges() const {
    std::vector<Segment> out;
    out.reserve(vertices.size());
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      out.push_back({vertices[i], vertices[(i + 1) % vertices.size()]});
    }
    return out;
  }
};

namespace detail {

// Monotone chain. `keep_collinear` selects between the strict hull (corners
// only) and the full boundary walk that retains collinear border points.
inline std::vector<PlanarPoint> chain_hull(std::vector<PlanarPoint> pts, bool keep_collinear) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::size_t n = pts.size();
  if (n <= 2) return pts;

  auto pops = [keep_collinear](const PlanarPoint& a, const PlanarPoint& b, const PlanarPoint& c) {
    int s = cross_sign(a, b, c);
    return keep_collinear ? s < 0 : s <= 0;
  };

  std::vector<PlanarPoint> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && pops(hull[k - 2], hull[k - 1], pts[i])) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {
    while (k >= t && pops(hull[k - 2], hull[k - 1], pts[i])) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);  // last point equals the first
  return hull;
}

}  // namespace detail

inline Hull convex_hull(std::span<const PlanarPoint> points) {
  if (points.size() < 3) throw DegenerateInput("convex hull needs at least 3 points");
  std::vector<PlanarPoint> hull =
      detail::chain_hull(std::vector<PlanarPoint>(points.begin(), points.end()), false);
  if (hull.size() < 3) throw DegenerateInput("all points collinear");
  return Hull{std::move(hull)};
}

inline bool point_strictly_outside(const PlanarPoint& p, std::span<const Segment> hull_edges) {
  for (const Segment& e : hull_edges) {
    if (cross_sign(e.a, e.b, p) < 0) return true;
  }
  return false;
}

// True when segment p->target meets the edge set only at `target` itself.
// A collinear overlap with any edge, a proper crossing, or contact at any
// other point all block visibility.
inline bool segment_reaches_only(const PlanarPoint& p, const PlanarPoint& target,
                                 std::span<const Segment> edges) {
  Segment ray{p, target};
  for (const Segment& e : edges) {
    IntersectionKind kind = classify_intersection(ray, e);
    if (kind == IntersectionKind::None) continue;
    if (kind == IntersectionKind::SharedEndpointOnly && point_on_segment(target, e)) continue;
    return false;
  }
  return true;
}

// Hull vertices P_k whose connecting segment from p touches the hull edge set
// only at P_k. Requires p strictly outside the hull.
inline std::vector<PlanarPoint> visible_hull_vertices(const PlanarPoint& p, const Hull& hull) {
  std::vector<Segment> edges = hull.edges();
  if (!point_strictly_outside(p, edges)) {
    throw PointInsideHull("query point is inside or on the hull");
  }
  std::vector<PlanarPoint> visible;
  for (const PlanarPoint& candidate : hull.vertices) {
    if (segment_reaches_only(p, candidate, edges)) visible.push_back(candidate);
  }
  return visible;
}

// Circle in the same grid units as the points.
struct Circle {
  double cx = 0.0;
  double cy = 0.0;
  double radius = 0.0;

  bool contains(const PlanarPoint& p, double slack = 1e-9) const {
    double dx = static_cast<double>(p.x) - cx;
    double dy = static_cast<double>(p.y) - cy;
    return std::sqrt(dx * dx + dy * dy) <= radius * (1.0 + slack) + 1e-12;
  }
};

namespace detail {

inline Circle circle_from_two(const PlanarPoint& a, const PlanarPoint& b) {
  double cx = (static_cast<double>(a.x) + b.x) / 2.0;
  double cy = (static_cast<double>(a.y) + b.y) / 2.0;
  double r = distance_units(a, b) / 2.0;
  return {cx, cy, r};
}

// Circumcircle through three non-collinear points. Long double keeps the
// intermediate products exact for city-scale coordinates.
inline Circle circle_from_three(const PlanarPoint& a, const PlanarPoint& b, const PlanarPoint& c) {
  long double bx = static_cast<long double>(b.x - a.x);
  long double by = static_cast<long double>(b.y - a.y);
  long double cx = static_cast<long double>(c.x - a.x);
  long double cy = static_cast<long double>(c.y - a.y);
  long double d = 2.0L * (bx * cy - by * cx);
  long double b2 = bx * bx + by * by;
  long double c2 = cx * cx + cy * cy;
  long double ux = (cy * b2 - by * c2) / d;
  long double uy = (bx * c2 - cx * b2) / d;
  long double r = std::sqrt(ux * ux + uy * uy);
  return {static_cast<double>(ux + a.x), static_cast<double>(uy + a.y), static_cast<double>(r)};
}

inline bool in_circle(const Circle& c, const PlanarPoint& p) {
  double dx = static_cast<double>(p.x) - c.cx;
  double dy = static_cast<double>(p.y) - c.cy;
  return std::sqrt(dx * dx + dy * dy) <= c.radius * (1.0 + 1e-10) + 1e-9;
}

}  // namespace detail

// Smallest circle containing all points (Welzl's randomized incremental
// construction, expected linear time). The shuffle seed is fixed so the same
// input always yields bit-identical output.
inline Circle min_enclosing_circle(std::span<const PlanarPoint> points,
                                   std::uint64_t shuffle_seed = 0x5DEECE66Dull) {
  if (points.empty()) throw EmptyInput("minimum enclosing circle of an empty set");
  std::vector<PlanarPoint> pts(points.begin(), points.end());
  SplitRng rng(shuffle_seed);
  rng.shuffle(pts);

  Circle circle{static_cast<double>(pts[0].x), static_cast<double>(pts[0].y), 0.0};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (detail::in_circle(circle, pts[i])) continue;
    circle = {static_cast<double>(pts[i].x), static_cast<double>(pts[i].y), 0.0};
    for (std::size_t j = 0; j < i; ++j) {
      if (detail::in_circle(circle, pts[j])) continue;
      circle = detail::circle_from_two(pts[i], pts[j]);
      for (std::size_t k = 0; k < j; ++k) {
        if (detail::in_circle(circle, pts[k])) continue;
        if (cross_sign(pts[i], pts[j], pts[k]) == 0) {
          // Collinear support: the diametral pair of the three.
          Circle best = detail::circle_from_two(pts[i], pts[j]);
          Circle c2 = detail::circle_from_two(pts[i], pts[k]);
          Circle c3 = detail::circle_from_two(pts[j], pts[k]);
          if (c2.radius > best.radius) best = c2;
          if (c3.radius > best.radius) best = c3;
          circle = best;
        } else {
          circle = detail::circle_from_three(pts[i], pts[j], pts[k]);
        }
      }
    }
  }
  return circle;
}

}  // namespace crowdalloc
