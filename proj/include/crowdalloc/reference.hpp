#pragma once

// Reference implementations and brute-force checkers. Everything here is
// deliberately written on the slow, obvious path so it can serve as an
// independent oracle for the production code. Used by the test suites and
// the `verify` CLI subcommand; never by the pipeline itself.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include "crowdalloc/geometry.hpp"
#include "crowdalloc/matching.hpp"
#include "crowdalloc/ncgraph.hpp"

namespace crowdalloc::reference {

// Exhaustive pairwise check of the non-crossing property: no two edges
// without a shared endpoint may properly cross or overlap.
inline bool planar(const NonCrossingGraph& g, std::string* why = nullptr) {
  std::vector<std::pair<int, int>> edges = g.edges();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& [a1, b1] = edges[i];
    const PlanarPoint& p1 = g.vertices[a1];
    const PlanarPoint& q1 = g.vertices[b1];
    std::int64_t min_x = std::min(p1.x, q1.x), max_x = std::max(p1.x, q1.x);
    std::int64_t min_y = std::min(p1.y, q1.y), max_y = std::max(p1.y, q1.y);
    for (std::size_t j = i + 1; j < edges.size(); ++j) {
      const auto& [a2, b2] = edges[j];
      if (a1 == a2 || a1 == b2 || b1 == a2 || b1 == b2) continue;
      const PlanarPoint& p2 = g.vertices[a2];
      const PlanarPoint& q2 = g.vertices[b2];
      if (std::max(p2.x, q2.x) < min_x || std::min(p2.x, q2.x) > max_x ||
          std::max(p2.y, q2.y) < min_y || std::min(p2.y, q2.y) > max_y) {
        continue;
      }
      IntersectionKind kind = classify_intersection({p1, q1}, {p2, q2});
      if (kind == IntersectionKind::ProperInterior || kind == IntersectionKind::CollinearOverlap) {
        if (why) {
          *why = "edges (" + std::to_string(a1) + "," + std::to_string(b1) + ") and (" +
                 std::to_string(a2) + "," + std::to_string(b2) + ") intersect";
        }
        return false;
      }
    }
  }
  return true;
}

inline bool connected(const NonCrossingGraph& g) {
  if (g.vertices.empty()) return true;
  std::vector<char> seen(g.vertices.size(), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int u : g.adjacency[v]) {
      if (!seen[u]) {
        seen[u] = 1;
        ++reached;
        stack.push_back(u);
      }
    }
  }
  return reached == g.vertices.size();
}

// Every border-walk edge of the current vertex set must be a graph edge.
// The walk keeps collinear border vertices, so chains through them count.
inline bool hull_edges_present(const NonCrossingGraph& g) {
  const auto& walk = g.boundary.walk;
  const std::size_t m = walk.size();
  if (m < 2) return true;
  const std::size_t last = g.boundary.ring ? m : m - 1;
  for (std::size_t i = 0; i < last; ++i) {
    if (!g.has_edge(walk[i], walk[(i + 1) % m])) return false;
  }
  return true;
}

// Half-plane containment oracle for a counterclockwise hull.
inline bool hull_contains_all(const Hull& hull, std::span<const PlanarPoint> points) {
  for (std::size_t i = 0; i < hull.vertices.size(); ++i) {
    const PlanarPoint& a = hull.vertices[i];
    const PlanarPoint& b = hull.vertices[(i + 1) % hull.vertices.size()];
    for (const PlanarPoint& p : points) {
      if (cross_sign(a, b, p) < 0) return false;
    }
  }
  return true;
}

// Minimum enclosing circle by enumerating every pair-diametral and
// triple-circumscribed candidate, cubic time.
inline Circle brute_force_mec(std::span<const PlanarPoint> points) {
  if (points.empty()) throw EmptyInput("empty point set");
  const double slack = 1e-10;
  auto contains_all = [&](const Circle& c) {
    for (const PlanarPoint& p : points) {
      double dx = static_cast<double>(p.x) - c.cx;
      double dy = static_cast<double>(p.y) - c.cy;
      if (std::sqrt(dx * dx + dy * dy) > c.radius * (1.0 + slack) + 1e-9) return false;
    }
    return true;
  };
  auto diametral = [](const PlanarPoint& a, const PlanarPoint& b) {
    return Circle{(static_cast<double>(a.x) + b.x) / 2.0, (static_cast<double>(a.y) + b.y) / 2.0,
                  distance_units(a, b) / 2.0};
  };
  auto circum = [](const PlanarPoint& a, const PlanarPoint& b, const PlanarPoint& c) {
    long double ax = a.x, ay = a.y, bx = b.x, by = b.y, cx = c.x, cy = c.y;
    long double d = 2.0L * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
    long double a2 = ax * ax + ay * ay, b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
    long double ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d;
    long double uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d;
    long double r = std::sqrt((ux - ax) * (ux - ax) + (uy - ay) * (uy - ay));
    return Circle{static_cast<double>(ux), static_cast<double>(uy), static_cast<double>(r)};
  };

  Circle best{static_cast<double>(points[0].x), static_cast<double>(points[0].y), 0.0};
  bool found = points.size() == 1;
  if (!found) best.radius = std::numeric_limits<double>::max();
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      Circle c = diametral(points[i], points[j]);
      if (c.radius < best.radius && contains_all(c)) {
        best = c;
        found = true;
      }
      for (std::size_t k = j + 1; k < points.size(); ++k) {
        if (cross_sign(points[i], points[j], points[k]) == 0) continue;
        Circle t = circum(points[i], points[j], points[k]);
        if (t.radius < best.radius && contains_all(t)) {
          best = t;
          found = true;
        }
      }
    }
  }
  return found ? best : Circle{static_cast<double>(points[0].x),
                               static_cast<double>(points[0].y), 0.0};
}

// Textbook density clustering in quadratic time, same semantics as the
// production clusterer: self-inclusive neighborhood counts, expansion in
// index order, trailing noise points promoted to singletons.
inline std::vector<int> dbscan(std::span<const PlanarPoint> pts, double eps_units, int min_pts) {
  const double eps2 = eps_units * eps_units;
  auto neighbors = [&](std::size_t i) {
    std::vector<int> out;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      double dx = static_cast<double>(pts[j].x - pts[i].x);
      double dy = static_cast<double>(pts[j].y - pts[i].y);
      if (dx * dx + dy * dy <= eps2) out.push_back(static_cast<int>(j));
    }
    return out;
  };

  constexpr int kUnvisited = -2, kNoise = -1;
  std::vector<int> label(pts.size(), kUnvisited);
  int next = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (label[i] != kUnvisited) continue;
    std::vector<int> seed = neighbors(i);
    if (static_cast<int>(seed.size()) < min_pts) {
      label[i] = kNoise;
      continue;
    }
    label[i] = next;
    for (std::size_t s = 0; s < seed.size(); ++s) {
      int j = seed[s];
      if (label[j] == kNoise) label[j] = next;
      if (label[j] != kUnvisited) continue;
      label[j] = next;
      std::vector<int> jn = neighbors(static_cast<std::size_t>(j));
      if (static_cast<int>(jn.size()) >= min_pts) {
        seed.insert(seed.end(), jn.begin(), jn.end());
      }
    }
    ++next;
  }

  std::vector<int> remap(static_cast<std::size_t>(next) + pts.size(), -1);
  std::vector<int> out(pts.size(), -1);
  int assigned = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    int raw = label[i] == kNoise ? next + static_cast<int>(i) : label[i];
    if (remap[raw] == -1) remap[raw] = assigned++;
    out[i] = remap[raw];
  }
  return out;
}

// Step-by-step simulation of the capped greedy allocation rule, scanning the
// whole table per worker instead of using pre-sorted candidate lists.
inline AllocationResult greedy_allocate(const MatchingTable& table, std::span<const int> sequence,
                                        int cap) {
  AllocationResult result;
  for (int worker : sequence) {
    bool has_candidate = false;
    double best_value = 0.0;
    int best_task = -1;
    for (const auto& [key, value] : table.values) {
      if (key.first != worker) continue;
      auto it = result.allocation_counts.find(key.second);
      if (it != result.allocation_counts.end() && it->second >= cap) continue;
      if (!has_candidate || value < best_value ||
          (value == best_value && key.second < best_task)) {
        has_candidate = true;
        best_value = value;
        best_task = key.second;
      }
    }
    if (!has_candidate) {
      result.unmatched_workers.push_back(worker);
      continue;
    }
    result.assignments.push_back({worker, best_task, best_value});
    ++result.allocation_counts[best_task];
  }
  return result;
}

// Spearman rank correlation with average ranks for ties.
inline double spearman(std::span<const double> xs, std::span<const double> ys) {
  auto ranks = [](std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    std::size_t i = 0;
    while (i < idx.size()) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  std::vector<double> rx = ranks(xs), ry = ranks(ys);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= static_cast<double>(rx.size());
  my /= static_cast<double>(ry.size());
  double cov = 0, vx = 0, vy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    cov += (rx[i] - mx) * (ry[i] - my);
    vx += (rx[i] - mx) * (rx[i] - mx);
    vy += (ry[i] - my) * (ry[i] - my);
  }
  if (vx == 0.0 || vy == 0.0) return 0.0;
  return cov / std::sqrt(vx * vy);
}

}  // namespace crowdalloc::reference
