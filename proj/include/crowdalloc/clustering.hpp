#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "crowdalloc/errors.hpp"
#include "crowdalloc/geometry.hpp"
#include "crowdalloc/rng.hpp"

namespace crowdalloc {

struct Task {
  std::string id;
  PlanarPoint location;
  double reward = 0.0;  // > 0
};

struct Worker {
  std::string id;
  PlanarPoint location;
  double ability = 0.0;  // > 0
};

struct TaskCluster {
  int id = -1;
  std::vector<Task> members;
  PlanarPoint center;  // quantized minimum-enclosing-circle center
};

struct WorkerCluster {
  int id = -1;
  std::vector<Worker> members;
  PlanarPoint center;
};

// Quantized center of the minimum enclosing circle of the member locations.
inline PlanarPoint cluster_center(std::span<const PlanarPoint> members) {
  if (members.empty()) throw EmptyInput("cluster center of an empty member set");
  Circle c = min_enclosing_circle(members);
  return {std::llround(c.cx), std::llround(c.cy)};
}

namespace detail {

// Fixed-radius neighbor index over a uniform grid with eps-sized cells.
class NeighborGrid {
 public:
  NeighborGrid(std::span<const PlanarPoint> pts, double eps_units)
      : points_(pts), cell_(std::max<std::int64_t>(1, std::llround(eps_units))) {
    eps2_ = eps_units * eps_units;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      cells_[key(pts[i])].push_back(static_cast<int>(i));
    }
  }

  // Indices within eps of pts[i], in ascending order, including i itself.
  std::vector<int> neighbors(std::size_t i) const {
    const PlanarPoint& p = points_[i];
    std::int64_t cx = floor_div(p.x, cell_);
    std::int64_t cy = floor_div(p.y, cell_);
    std::vector<int> out;
    for (std::int64_t gx = cx - 1; gx <= cx + 1; ++gx) {
      for (std::int64_t gy = cy - 1; gy <= cy + 1; ++gy) {
        auto it = cells_.find(pack(gx, gy));
        if (it == cells_.end()) continue;
        for (int j : it->second) {
          double dx = static_cast<double>(points_[j].x - p.x);
          double dy = static_cast<double>(points_[j].y - p.y);
          if (dx * dx + dy * dy <= eps2_) out.push_back(j);
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  static std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
  }
  std::uint64_t key(const PlanarPoint& p) const {
    return pack(floor_div(p.x, cell_), floor_div(p.y, cell_));
  }
  static std::uint64_t pack(std::int64_t gx, std::int64_t gy) {
    return (static_cast<std::uint64_t>(gx) << 32) ^ (static_cast<std::uint64_t>(gy) & 0xFFFFFFFFull);
  }

  std::span<const PlanarPoint> points_;
  std::int64_t cell_;
  double eps2_ = 0.0;
  std::unordered_map<std::uint64_t, std::vector<int>> cells_;
};

// Density-based labeling. A point is core when its eps-neighborhood (itself
// included) holds at least min_pts points. Clusters are grown from core
// points in index order; points never reached stay noise (label -1).
inline std::vector<int> dbscan_labels(std::span<const PlanarPoint> pts, double eps_units,
                                      int min_pts) {
  NeighborGrid grid(pts, eps_units);
  constexpr int kUnvisited = -2;
  constexpr int kNoise = -1;
  std::vector<int> label(pts.size(), kUnvisited);
  int next = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (label[i] != kUnvisited) continue;
    std::vector<int> nbrs = grid.neighbors(i);
    if (static_cast<int>(nbrs.size()) < min_pts) {
      label[i] = kNoise;
      continue;
    }
    int cluster = next++;
    label[i] = cluster;
    std::vector<int> frontier = std::move(nbrs);
    for (std::size_t f = 0; f < frontier.size(); ++f) {
      int j = frontier[f];
      if (label[j] == kNoise) label[j] = cluster;  // border point
      if (label[j] != kUnvisited) continue;
      label[j] = cluster;
      std::vector<int> jn = grid.neighbors(static_cast<std::size_t>(j));
      if (static_cast<int>(jn.size()) >= min_pts) {
        frontier.insert(frontier.end(), jn.begin(), jn.end());
      }
    }
  }
  // Noise points become their own clusters; ids follow first-encounter order
  // so the final labeling is a deterministic function of the input order.
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

}  // namespace detail

// Spatial density clustering of tasks. Noise points become singleton
// clusters so the allocation pipeline always covers every task.
inline std::vector<TaskCluster> cluster_tasks(std::span<const Task> tasks, double eps_m,
                                              int min_pts) {
  if (tasks.empty()) throw EmptyInput("no tasks to cluster");
  if (eps_m <= 0.0) throw Error("eps must be positive");
  if (min_pts < 1) throw Error("min_pts must be at least 1");
  std::vector<PlanarPoint> pts;
  pts.reserve(tasks.size());
  for (const Task& t : tasks) pts.push_back(t.location);
  std::vector<int> labels = detail::dbscan_labels(pts, eps_m * kUnitsPerMeter, min_pts);
  int count = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<TaskCluster> clusters(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    clusters[labels[i]].members.push_back(tasks[i]);
  }
  for (int c = 0; c < count; ++c) {
    clusters[c].id = c;
    std::vector<PlanarPoint> locs;
    locs.reserve(clusters[c].members.size());
    for (const Task& t : clusters[c].members) locs.push_back(t.location);
    clusters[c].center = cluster_center(locs);
  }
  return clusters;
}

namespace detail {

struct Feature3 {
  double v[3];
};

inline double feature_dist2(const Feature3& a, const Feature3& b) {
  double s = 0.0;
  for (int d = 0; d < 3; ++d) {
    double diff = a.v[d] - b.v[d];
    s += diff * diff;
  }
  return s;
}

}  // namespace detail

// Multivariate k-means over (x, y, ability), each dimension z-normalized and
// the ability dimension scaled by ability_weight. Seeded k-means++
// initialization, Lloyd iterations until convergence or 200 rounds, empty
// clusters repaired by splitting the largest one.
inline std::vector<WorkerCluster> cluster_workers(std::span<const Worker> workers, int k,
                                                  double ability_weight, std::uint64_t seed,
                                                  std::vector<double>* objective_trace = nullptr) {
  if (workers.empty()) throw EmptyInput("no workers to cluster");
  if (k < 1) throw Error("k must be at least 1");
  if (k > static_cast<int>(workers.size()))
    throw KTooLarge("k exceeds the number of workers");

  const std::size_t n = workers.size();
  std::vector<detail::Feature3> feats(n);
  {
    double mean[3] = {0, 0, 0};
    for (const Worker& w : workers) {
      mean[0] += static_cast<double>(w.location.x);
      mean[1] += static_cast<double>(w.location.y);
      mean[2] += w.ability;
    }
    for (double& m : mean) m /= static_cast<double>(n);
    double var[3] = {0, 0, 0};
    for (const Worker& w : workers) {
      double d0 = static_cast<double>(w.location.x) - mean[0];
      double d1 = static_cast<double>(w.location.y) - mean[1];
      double d2 = w.ability - mean[2];
      var[0] += d0 * d0;
      var[1] += d1 * d1;
      var[2] += d2 * d2;
    }
    double sigma[3];
    for (int d = 0; d < 3; ++d) sigma[d] = var[d] > 0.0 ? std::sqrt(var[d] / n) : 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      feats[i].v[0] = (static_cast<double>(workers[i].location.x) - mean[0]) / sigma[0];
      feats[i].v[1] = (static_cast<double>(workers[i].location.y) - mean[1]) / sigma[1];
      feats[i].v[2] = ability_weight * (workers[i].ability - mean[2]) / sigma[2];
    }
  }

  SplitRng rng(seed);
  std::vector<detail::Feature3> centroids;
  centroids.reserve(k);
  centroids.push_back(feats[rng.bounded(n)]);
  std::vector<double> d2(n);
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::max();
      for (const auto& c : centroids) best = std::min(best, detail::feature_dist2(feats[i], c));
      d2[i] = best;
      total += best;
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double target = rng.uniform01() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= target && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      if (d2[pick] == 0.0) {
        for (std::size_t i = 0; i < n; ++i)
          if (d2[i] > 0.0) pick = i;
      }
    } else {
      // All remaining points coincide with a centroid; take the first index
      // not yet used so k centroids always exist.
      pick = centroids.size() % n;
    }
    centroids.push_back(feats[pick]);
  }

  std::vector<int> assign(n, 0);
  for (int iter = 0; iter < 200; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::max();
      int arg = 0;
      for (int c = 0; c < k; ++c) {
        double dd = detail::feature_dist2(feats[i], centroids[c]);
        if (dd < best) {
          best = dd;
          arg = c;
        }
      }
      assign[i] = arg;
    }

    // Empty-cluster repair: move the farthest member of the largest cluster.
    while (true) {
      std::vector<int> size(k, 0);
      for (int a : assign) ++size[a];
      int empty = -1;
      for (int c = 0; c < k; ++c)
        if (size[c] == 0) {
          empty = c;
          break;
        }
      if (empty < 0) break;
      int largest = static_cast<int>(std::max_element(size.begin(), size.end()) - size.begin());
      std::size_t far_idx = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (assign[i] != largest) continue;
        double dd = detail::feature_dist2(feats[i], centroids[largest]);
        if (dd > far_d) {
          far_d = dd;
          far_idx = i;
        }
      }
      assign[far_idx] = empty;
      centroids[empty] = feats[far_idx];
    }

    if (objective_trace) {
      double obj = 0.0;
      std::vector<detail::Feature3> mean(k, {{0, 0, 0}});
      std::vector<int> size(k, 0);
      for (std::size_t i = 0; i < n; ++i) {
        for (int d = 0; d < 3; ++d) mean[assign[i]].v[d] += feats[i].v[d];
        ++size[assign[i]];
      }
      for (int c = 0; c < k; ++c)
        for (int d = 0; d < 3; ++d) mean[c].v[d] /= std::max(1, size[c]);
      for (std::size_t i = 0; i < n; ++i) obj += detail::feature_dist2(feats[i], mean[assign[i]]);
      objective_trace->push_back(obj);
    }

    std::vector<detail::Feature3> next(k, {{0, 0, 0}});
    std::vector<int> size(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (int d = 0; d < 3; ++d) next[assign[i]].v[d] += feats[i].v[d];
      ++size[assign[i]];
    }
    double movement = 0.0;
    for (int c = 0; c < k; ++c) {
      for (int d = 0; d < 3; ++d) next[c].v[d] /= std::max(1, size[c]);
      movement = std::max(movement, std::sqrt(detail::feature_dist2(next[c], centroids[c])));
    }
    centroids = std::move(next);
    if (movement < 1e-6) break;
  }

  std::vector<WorkerCluster> clusters(k);
  for (std::size_t i = 0; i < n; ++i) clusters[assign[i]].members.push_back(workers[i]);
  for (int c = 0; c < k; ++c) {
    clusters[c].id = c;
    std::vector<PlanarPoint> locs;
    locs.reserve(clusters[c].members.size());
    for (const Worker& w : clusters[c].members) locs.push_back(w.location);
    clusters[c].center = cluster_center(locs);
  }
  return clusters;
}

// Reduces a trajectory to one representative location: density-cluster the
// points, take the largest cluster (ties: lowest cluster id), return the
// quantized center of its minimum enclosing circle.
inline PlanarPoint trajectory_to_location(std::span<const PlanarPoint> trajectory, double eps_m,
                                          int min_pts) {
  if (trajectory.empty()) throw EmptyInput("empty trajectory");
  std::vector<int> labels = detail::dbscan_labels(trajectory, eps_m * kUnitsPerMeter, min_pts);
  int count = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<int> size(count, 0);
  for (int l : labels) ++size[l];
  int best = 0;
  for (int c = 1; c < count; ++c)
    if (size[c] > size[best]) best = c;
  std::vector<PlanarPoint> members;
  members.reserve(size[best]);
  for (std::size_t i = 0; i < trajectory.size(); ++i)
    if (labels[i] == best) members.push_back(trajectory[i]);
  return cluster_center(members);
}

}  // namespace crowdalloc
