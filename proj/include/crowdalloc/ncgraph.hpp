#pragma once

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "crowdalloc/clustering.hpp"
#include "crowdalloc/errors.hpp"
#include "crowdalloc/geometry.hpp"

namespace crowdalloc {

namespace detail {

// Border walk of a vertex subset. Non-degenerate sets give a counterclockwise
// ring that keeps collinear border vertices; collinear or tiny sets give an
// open path in line order. `corners` are the strict hull vertices, which are
// the only candidates for new connections.
struct BoundaryInfo {
  std::vector<int> walk;
  bool ring = false;
  std::vector<int> corners;
};

inline BoundaryInfo boundary_info(std::span<const PlanarPoint> pts, std::vector<int> ids) {
  BoundaryInfo info;
  std::sort(ids.begin(), ids.end(),
            [&](int a, int b) { return pts[a] < pts[b]; });
  const std::size_t n = ids.size();
  if (n <= 2) {
    info.walk = ids;
    info.corners = ids;
    return info;
  }

  auto build_chain = [&](bool reversed) {
    std::vector<int> chain;
    auto step = [&](int id) {
      while (chain.size() >= 2 &&
             cross_sign(pts[chain[chain.size() - 2]], pts[chain.back()], pts[id]) < 0) {
        chain.pop_back();
      }
      chain.push_back(id);
    };
    if (!reversed) {
      for (std::size_t i = 0; i < n; ++i) step(ids[i]);
    } else {
      for (std::size_t i = n; i-- > 0;) step(ids[i]);
    }
    return chain;
  };

  std::vector<int> lower = build_chain(false);
  std::vector<int> upper = build_chain(true);
  if (static_cast<int>(lower.size()) == static_cast<int>(n) &&
      static_cast<int>(upper.size()) == static_cast<int>(n)) {
    // Everything on one line.
    bool collinear = true;
    for (std::size_t i = 2; i < n && collinear; ++i) {
      collinear = cross_sign(pts[ids[0]], pts[ids[1]], pts[ids[i]]) == 0;
    }
    if (collinear) {
      info.walk = ids;
      info.corners = {ids.front(), ids.back()};
      return info;
    }
  }

  info.ring = true;
  info.walk = std::move(lower);
  info.walk.pop_back();
  for (std::size_t i = 0; i + 1 < upper.size(); ++i) info.walk.push_back(upper[i]);
  const std::size_t m = info.walk.size();
  for (std::size_t i = 0; i < m; ++i) {
    const PlanarPoint& prev = pts[info.walk[(i + m - 1) % m]];
    const PlanarPoint& cur = pts[info.walk[i]];
    const PlanarPoint& next = pts[info.walk[(i + 1) % m]];
    if (cross_sign(prev, cur, next) != 0) info.corners.push_back(info.walk[i]);
  }
  return info;
}

inline std::vector<Segment> boundary_edges(std::span<const PlanarPoint> pts,
                                           const BoundaryInfo& info) {
  std::vector<Segment> edges;
  const std::size_t m = info.walk.size();
  if (m < 2) return edges;
  const std::size_t last = info.ring ? m : m - 1;
  edges.reserve(last);
  for (std::size_t i = 0; i < last; ++i) {
    edges.push_back({pts[info.walk[i]], pts[info.walk[(i + 1) % m]]});
  }
  return edges;
}

// Corner vertices reachable from p by a segment touching the border only at
// the target vertex. When p lies exactly on a border edge (stacked equal-x
// vertices), it is linked to that edge's endpoints instead.
inline std::vector<int> visible_corners(std::span<const PlanarPoint> pts, const PlanarPoint& p,
                                        const BoundaryInfo& info) {
  std::vector<Segment> edges = boundary_edges(pts, info);
  const std::size_t m = info.walk.size();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (point_on_segment(p, edges[i])) {
      return {info.walk[i], info.walk[(i + 1) % m]};
    }
  }
  std::vector<int> visible;
  for (int c : info.corners) {
    if (segment_reaches_only(p, pts[c], edges)) visible.push_back(c);
  }
  std::sort(visible.begin(), visible.end());
  return visible;
}

}  // namespace detail

// Undirected graph whose edges meet only at shared vertices (Definition 3 of
// the non-crossing property). Vertices are stored in build order: descending
// x, ties by descending y.
struct NonCrossingGraph {
  std::vector<PlanarPoint> vertices;
  std::vector<std::vector<int>> adjacency;  // sorted neighbor lists
  detail::BoundaryInfo boundary;            // cached border of the vertex set

  bool has_edge(int a, int b) const {
    const auto& n = adjacency[a];
    return std::binary_search(n.begin(), n.end(), b);
  }

  void add_edge(int a, int b) {
    if (a == b || has_edge(a, b)) return;
    adjacency[a].insert(std::upper_bound(adjacency[a].begin(), adjacency[a].end(), b), b);
    adjacency[b].insert(std::upper_bound(adjacency[b].begin(), adjacency[b].end(), a), a);
  }

  std::size_t edge_count() const {
    std::size_t deg = 0;
    for (const auto& n : adjacency) deg += n.size();
    return deg / 2;
  }

  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(edge_count());
    for (int a = 0; a < static_cast<int>(adjacency.size()); ++a) {
      for (int b : adjacency[a]) {
        if (a < b) out.emplace_back(a, b);
      }
    }
    return out;
  }

  // Line-oriented dump: `V id x y` rows then `E id1 id2` rows, ids ascending.
  std::string dump() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      os << "V " << i << ' ' << vertices[i].x << ' ' << vertices[i].y << '\n';
    }
    for (const auto& [a, b] : edges()) {
      os << "E " << a << ' ' << b << '\n';
    }
    return os.str();
  }
};

// Non-crossing graph construction. Points are sorted by descending x (ties by
// descending y), the first non-collinear triple seeds the hull, and every
// subsequent point is linked to the hull corners it can reach without
// touching the border anywhere else.
inline NonCrossingGraph build(std::vector<PlanarPoint> points) {
  if (points.size() < 3) throw DegenerateInput("graph construction needs at least 3 points");
  std::sort(points.begin(), points.end(), [](const PlanarPoint& a, const PlanarPoint& b) {
    return a.x != b.x ? a.x > b.x : a.y > b.y;
  });
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i] == points[i - 1]) throw DuplicatePoints("duplicate point in graph input");
  }

  std::size_t third = 2;
  while (third < points.size() &&
         cross_sign(points[0], points[1], points[third]) == 0) {
    ++third;
  }
  if (third == points.size()) throw DegenerateInput("all points collinear");

  NonCrossingGraph g;
  g.vertices = std::move(points);
  g.adjacency.assign(g.vertices.size(), {});
  g.add_edge(0, 1);
  g.add_edge(0, static_cast<int>(third));
  g.add_edge(1, static_cast<int>(third));
  g.boundary = detail::boundary_info(g.vertices, {0, 1, static_cast<int>(third)});

  for (std::size_t i = 2; i < g.vertices.size(); ++i) {
    if (i == third) continue;
    int id = static_cast<int>(i);
    for (int c : detail::visible_corners(g.vertices, g.vertices[i], g.boundary)) {
      g.add_edge(id, c);
    }
    std::vector<int> border = g.boundary.walk;
    border.push_back(id);
    g.boundary = detail::boundary_info(g.vertices, std::move(border));
  }
  return g;
}

struct InsertionOutcome {
  NonCrossingGraph graph;
  int inserted_vertex = -1;
  std::vector<std::pair<int, int>> incident_edges;  // the A / A_r connections
};

// Inserts a point into a copy of the graph. The vertex set is split by the
// vertical line through the new point (equal-x vertices go right); edges with
// endpoints strictly on opposite sides are dropped, the point is linked into
// the right part, and the two border walks are re-stitched with mutually
// reachable corner pairs. Candidate stitches that would cross an edge kept
// across the line, or an earlier stitch, are skipped: the non-crossing
// invariant takes precedence over stitch completeness.
inline InsertionOutcome insert(const NonCrossingGraph& g, const PlanarPoint& p_new) {
  for (const PlanarPoint& v : g.vertices) {
    if (v == p_new) throw DuplicatePoint("point already a graph vertex");
  }

  const int n = static_cast<int>(g.vertices.size());
  InsertionOutcome out;
  out.inserted_vertex = n;
  NonCrossingGraph& ng = out.graph;
  ng.vertices = g.vertices;
  ng.vertices.push_back(p_new);
  ng.adjacency.assign(ng.vertices.size(), {});

  std::vector<int> left, right;
  for (int i = 0; i < n; ++i) {
    (g.vertices[i].x < p_new.x ? left : right).push_back(i);
  }

  std::vector<std::pair<int, int>> strip_kept;
  for (const auto& [a, b] : g.edges()) {
    std::int64_t ax = g.vertices[a].x, bx = g.vertices[b].x;
    bool crosses = (ax < p_new.x && bx > p_new.x) || (ax > p_new.x && bx < p_new.x);
    if (crosses) continue;
    ng.add_edge(a, b);
    if (std::min(ax, bx) < p_new.x && std::max(ax, bx) == p_new.x) {
      strip_kept.emplace_back(a, b);
    }
  }

  auto attach = [&](const detail::BoundaryInfo& info) {
    for (int c : detail::visible_corners(ng.vertices, p_new, info)) {
      ng.add_edge(n, c);
      out.incident_edges.emplace_back(n, c);
    }
  };

  if (left.empty() || right.empty()) {
    attach(g.boundary);
  } else {
    detail::BoundaryInfo info_l = detail::boundary_info(ng.vertices, left);
    attach(detail::boundary_info(ng.vertices, right));

    right.push_back(n);
    detail::BoundaryInfo info_r = detail::boundary_info(ng.vertices, right);
    std::vector<Segment> edges_r = detail::boundary_edges(ng.vertices, info_r);
    std::vector<Segment> edges_l = detail::boundary_edges(ng.vertices, info_l);

    std::vector<std::pair<int, int>> hazards = strip_kept;
    auto crosses_hazard = [&](int ka, int kb) {
      Segment cand{ng.vertices[ka], ng.vertices[kb]};
      for (const auto& [ea, eb] : hazards) {
        if (ea == ka || ea == kb || eb == ka || eb == kb) continue;
        IntersectionKind kind =
            classify_intersection(cand, {ng.vertices[ea], ng.vertices[eb]});
        if (kind == IntersectionKind::ProperInterior ||
            kind == IntersectionKind::CollinearOverlap) {
          return true;
        }
      }
      return false;
    };

    for (int pk : info_l.corners) {
      for (int pm : info_r.corners) {
        if (ng.has_edge(pk, pm)) continue;
        if (!segment_reaches_only(ng.vertices[pk], ng.vertices[pm], edges_r)) continue;
        if (!segment_reaches_only(ng.vertices[pm], ng.vertices[pk], edges_l)) continue;
        if (crosses_hazard(pk, pm)) continue;
        ng.add_edge(pk, pm);
        if (pm == n) {
          out.incident_edges.emplace_back(n, pk);
        }
        hazards.emplace_back(pk, pm);
      }
    }
  }

  std::vector<int> all(ng.vertices.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  ng.boundary = detail::boundary_info(ng.vertices, std::move(all));
  std::sort(out.incident_edges.begin(), out.incident_edges.end());
  out.incident_edges.erase(std::unique(out.incident_edges.begin(), out.incident_edges.end()),
                           out.incident_edges.end());
  return out;
}

// Vertices at hop distance 1..layers from v, ordered by (hop distance, id).
inline std::vector<int> k_layer_neighbors(const NonCrossingGraph& g, int v, int layers) {
  if (v < 0 || v >= static_cast<int>(g.vertices.size()))
    throw UnknownVertex("vertex " + std::to_string(v) + " not in graph");
  if (layers < 1) throw Error("layer count must be at least 1");

  std::vector<int> dist(g.vertices.size(), -1);
  dist[v] = 0;
  std::queue<int> queue;
  queue.push(v);
  std::vector<int> found;
  while (!queue.empty()) {
    int cur = queue.front();
    queue.pop();
    if (dist[cur] == layers) continue;
    for (int nxt : g.adjacency[cur]) {
      if (dist[nxt] != -1) continue;
      dist[nxt] = dist[cur] + 1;
      found.push_back(nxt);
      queue.push(nxt);
    }
  }
  std::sort(found.begin(), found.end(),
            [&](int a, int b) { return dist[a] != dist[b] ? dist[a] < dist[b] : a < b; });
  return found;
}

struct AdjacencyLists {
  std::map<int, std::vector<int>> task_to_workers;
  std::map<int, std::vector<int>> worker_to_tasks;
  int layers = 1;
};

namespace detail {

inline std::unordered_map<PlanarPoint, int, PlanarPointHash> center_index(
    std::span<const PlanarPoint> centers) {
  std::unordered_map<PlanarPoint, int, PlanarPointHash> index;
  index.reserve(centers.size());
  for (std::size_t i = 0; i < centers.size(); ++i) {
    index[centers[i]] = static_cast<int>(i);
  }
  return index;
}

}  // namespace detail

// Builds independent graphs over task and worker cluster centers, then
// queries adjacency by inserting each center of one type into a copy of the
// other type's graph and reading the inserted vertex's L-layer neighborhood.
// Single-type graphs avoid mixed-type neighborhoods; copy-insert queries keep
// the base graphs untouched.
inline AdjacencyLists reconfigure(std::span<const TaskCluster> task_clusters,
                                  std::span<const WorkerCluster> worker_clusters, int layers) {
  if (task_clusters.size() < 3 || worker_clusters.size() < 3)
    throw DegenerateInput("reconfiguration needs at least 3 clusters per side");
  if (layers < 1) throw Error("layer count must be at least 1");

  std::vector<PlanarPoint> task_centers, worker_centers;
  task_centers.reserve(task_clusters.size());
  worker_centers.reserve(worker_clusters.size());
  for (const TaskCluster& c : task_clusters) task_centers.push_back(c.center);
  for (const WorkerCluster& c : worker_clusters) worker_centers.push_back(c.center);

  auto check_distinct = [](std::span<const PlanarPoint> centers, const char* side) {
    auto index = detail::center_index(centers);
    if (index.size() != centers.size()) {
      for (std::size_t i = 0; i < centers.size(); ++i) {
        int other = index[centers[i]];
        if (other != static_cast<int>(i)) {
          throw DuplicatePoint(std::string(side) + " clusters " +
                               std::to_string(std::min<int>(other, i)) + " and " +
                               std::to_string(std::max<int>(other, i)) + " share a center");
        }
      }
    }
  };
  check_distinct(task_centers, "task");
  check_distinct(worker_centers, "worker");

  NonCrossingGraph task_graph, worker_graph;
  try {
    task_graph = build(task_centers);
  } catch (const DegenerateInput&) {
    throw DegenerateInput("task cluster centers are collinear");
  }
  try {
    worker_graph = build(worker_centers);
  } catch (const DegenerateInput&) {
    throw DegenerateInput("worker cluster centers are collinear");
  }

  auto task_ids = detail::center_index(task_centers);
  auto worker_ids = detail::center_index(worker_centers);

  AdjacencyLists lists;
  lists.layers = layers;

  for (const TaskCluster& t : task_clusters) {
    InsertionOutcome q;
    try {
      q = insert(worker_graph, t.center);
    } catch (const DuplicatePoint&) {
      throw DuplicatePoint("task cluster " + std::to_string(t.id) +
                           " center coincides with a worker cluster center");
    }
    std::vector<int>& adj = lists.task_to_workers[t.id];
    for (int v : k_layer_neighbors(q.graph, q.inserted_vertex, layers)) {
      adj.push_back(worker_ids.at(q.graph.vertices[v]));
    }
  }
  for (const WorkerCluster& w : worker_clusters) {
    InsertionOutcome q;
    try {
      q = insert(task_graph, w.center);
    } catch (const DuplicatePoint&) {
      throw DuplicatePoint("worker cluster " + std::to_string(w.id) +
                           " center coincides with a task cluster center");
    }
    std::vector<int>& adj = lists.worker_to_tasks[w.id];
    for (int v : k_layer_neighbors(q.graph, q.inserted_vertex, layers)) {
      adj.push_back(task_ids.at(q.graph.vertices[v]));
    }
  }
  return lists;
}

}  // namespace crowdalloc
