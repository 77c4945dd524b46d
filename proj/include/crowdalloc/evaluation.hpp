#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "crowdalloc/clustering.hpp"
#include "crowdalloc/errors.hpp"
#include "crowdalloc/ncgraph.hpp"

namespace crowdalloc {

enum class ValueBasis { Avg, Sum };

inline std::string to_string(ValueBasis b) { return b == ValueBasis::Avg ? "AVG" : "SUM"; }

// Whether cluster aggregates use the mean or the sum of member values. The
// task side feeds p() of the task score, the worker side feeds a() of the
// worker score; the two are independent.
struct EvalBasis {
  ValueBasis task_side = ValueBasis::Sum;
  ValueBasis worker_side = ValueBasis::Sum;
};

struct EvalWeights {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
};

inline double task_value(const TaskCluster& cluster, ValueBasis basis) {
  double sum = 0.0;
  for (const Task& t : cluster.members) sum += t.reward;
  return basis == ValueBasis::Sum ? sum : sum / static_cast<double>(cluster.members.size());
}

inline double worker_value(const WorkerCluster& cluster, ValueBasis basis) {
  double sum = 0.0;
  for (const Worker& w : cluster.members) sum += w.ability;
  return basis == ValueBasis::Sum ? sum : sum / static_cast<double>(cluster.members.size());
}

// Maximum pairwise distance between member locations, in meters.
inline double task_dispersion(const TaskCluster& cluster) {
  double best = 0.0;
  for (std::size_t i = 0; i < cluster.members.size(); ++i) {
    for (std::size_t j = i + 1; j < cluster.members.size(); ++j) {
      best = std::max(best,
                      distance_meters(cluster.members[i].location, cluster.members[j].location));
    }
  }
  return best;
}

// Population variance of member abilities.
inline double worker_dispersion(const WorkerCluster& cluster) {
  double mean = 0.0;
  for (const Worker& w : cluster.members) mean += w.ability;
  mean /= static_cast<double>(cluster.members.size());
  double var = 0.0;
  for (const Worker& w : cluster.members) var += (w.ability - mean) * (w.ability - mean);
  return var / static_cast<double>(cluster.members.size());
}

// Task-cluster score against a worker-cluster anchor:
//   alpha * value - beta * dispersion - gamma * center distance.
inline double eval_task(const TaskCluster& cluster, const WorkerCluster& anchor,
                        const EvalWeights& w, ValueBasis task_basis) {
  return w.alpha * task_value(cluster, task_basis) - w.beta * task_dispersion(cluster) -
         w.gamma * distance_meters(cluster.center, anchor.center);
}

// Worker-cluster score against a task-cluster anchor, with ability variance
// as the dispersion term.
inline double eval_worker(const WorkerCluster& cluster, const TaskCluster& anchor,
                          const EvalWeights& w, ValueBasis worker_basis) {
  return w.alpha * worker_value(cluster, worker_basis) - w.beta * worker_dispersion(cluster) -
         w.gamma * distance_meters(cluster.center, anchor.center);
}

struct RankedEntry {
  int candidate = -1;
  double score = 0.0;
  int rank = 0;  // 1-based, no gaps
};

// Per-anchor candidate lists ordered by descending score; equal scores break
// by ascending candidate id.
struct RankedAdjacency {
  std::map<int, std::vector<RankedEntry>> lists;
};

struct RankedPair {
  RankedAdjacency tasks_for_workers;   // anchor: worker cluster, scored via eval_task
  RankedAdjacency workers_for_tasks;   // anchor: task cluster, scored via eval_worker
};

namespace detail {

inline void assign_ranks(std::vector<RankedEntry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const RankedEntry& a, const RankedEntry& b) {
    return a.score != b.score ? a.score > b.score : a.candidate < b.candidate;
  });
  for (std::size_t i = 0; i < entries.size(); ++i) {
    entries[i].rank = static_cast<int>(i) + 1;
  }
}

}  // namespace detail

// Turns graph adjacency into ranked candidate lists for both directions.
// Cluster values and dispersions are anchor-independent and computed once.
inline RankedPair rank_candidates(const AdjacencyLists& adjacency,
                                  std::span<const TaskCluster> tasks,
                                  std::span<const WorkerCluster> workers, const EvalWeights& w,
                                  const EvalBasis& basis) {
  if (w.alpha <= 0.0 && w.beta <= 0.0 && w.gamma <= 0.0)
    throw Error("at least one evaluation weight must be positive");

  std::vector<double> tvalue(tasks.size()), tdisp(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    tvalue[i] = task_value(tasks[i], basis.task_side);
    tdisp[i] = task_dispersion(tasks[i]);
  }
  std::vector<double> wvalue(workers.size()), wdisp(workers.size());
  for (std::size_t i = 0; i < workers.size(); ++i) {
    wvalue[i] = worker_value(workers[i], basis.worker_side);
    wdisp[i] = worker_dispersion(workers[i]);
  }

  RankedPair out;
  for (const auto& [worker_id, task_ids] : adjacency.worker_to_tasks) {
    std::vector<RankedEntry>& entries = out.tasks_for_workers.lists[worker_id];
    entries.reserve(task_ids.size());
    for (int t : task_ids) {
      double score = w.alpha * tvalue[t] - w.beta * tdisp[t] -
                     w.gamma * distance_meters(tasks[t].center, workers[worker_id].center);
      entries.push_back({t, score, 0});
    }
    detail::assign_ranks(entries);
  }
  for (const auto& [task_id, worker_ids] : adjacency.task_to_workers) {
    std::vector<RankedEntry>& entries = out.workers_for_tasks.lists[task_id];
    entries.reserve(worker_ids.size());
    for (int c : worker_ids) {
      double score = w.alpha * wvalue[c] - w.beta * wdisp[c] -
                     w.gamma * distance_meters(workers[c].center, tasks[task_id].center);
      entries.push_back({c, score, 0});
    }
    detail::assign_ranks(entries);
  }
  return out;
}

}  // namespace crowdalloc
