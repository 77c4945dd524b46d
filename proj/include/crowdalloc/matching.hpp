#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crowdalloc/errors.hpp"
#include "crowdalloc/evaluation.hpp"
#include "crowdalloc/rng.hpp"

namespace crowdalloc {

// Merged bidirectional rank: w * rank_t + (1 - w) * rank_w, lower is better.
// rank_t is the task cluster's rank in the worker cluster's list and rank_w
// the worker cluster's rank in the task cluster's list.
inline double merge_ranks(int rank_t, int rank_w, double w) {
  if (w < 0.0 || w > 1.0) throw WOutOfRange("merge weight must lie in [0, 1]");
  if (rank_t < 1 || rank_w < 1) throw Error("ranks are 1-based");
  return w * static_cast<double>(rank_t) + (1.0 - w) * static_cast<double>(rank_w);
}

// Which side's rank the merge weight w multiplies. WeightTaskRank is the
// literal reading of the merge formula; WeightWorkerRank applies w to the
// rank drawn from the task cluster's list instead. The two produce mirrored
// payoff trends over w; the shipped default is the one that reproduces the
// reference trend (requester payoff rising in w).
enum class RankConvention { WeightTaskRank, WeightWorkerRank };

inline constexpr RankConvention kDefaultRankConvention = RankConvention::WeightWorkerRank;

// Matching values keyed by (worker cluster id, task cluster id). An entry
// exists only when each cluster appears in the other's ranked list.
struct MatchingTable {
  std::map<std::pair<int, int>, double> values;
};

inline MatchingTable build_table(const RankedPair& ranked, double w,
                                 RankConvention convention = kDefaultRankConvention) {
  if (w < 0.0 || w > 1.0) throw WOutOfRange("merge weight must lie in [0, 1]");
  MatchingTable table;
  for (const auto& [worker_id, task_entries] : ranked.tasks_for_workers.lists) {
    for (const RankedEntry& te : task_entries) {
      auto it = ranked.workers_for_tasks.lists.find(te.candidate);
      if (it == ranked.workers_for_tasks.lists.end()) continue;
      const std::vector<RankedEntry>& worker_entries = it->second;
      auto we = std::find_if(worker_entries.begin(), worker_entries.end(),
                             [&](const RankedEntry& e) { return e.candidate == worker_id; });
      if (we == worker_entries.end()) continue;
      int rank_t = te.rank;       // task's rank in the worker's list
      int rank_w = we->rank;      // worker's rank in the task's list
      double value = convention == RankConvention::WeightTaskRank
                         ? merge_ranks(rank_t, rank_w, w)
                         : merge_ranks(rank_w, rank_t, w);
      table.values[{worker_id, te.candidate}] = value;
    }
  }
  return table;
}

struct TraversalOrder {
  enum class Kind { NonLmt, Random, Xcoord, AvgAbility, SumAbility };
  Kind kind = Kind::AvgAbility;
  std::uint64_t seed = 0;  // only Random uses it
};

inline std::string to_string(TraversalOrder::Kind k) {
  switch (k) {
    case TraversalOrder::Kind::NonLmt: return "NonLMT";
    case TraversalOrder::Kind::Random: return "Random";
    case TraversalOrder::Kind::Xcoord: return "Xcoord";
    case TraversalOrder::Kind::AvgAbility: return "AVG";
    case TraversalOrder::Kind::SumAbility: return "SUM";
  }
  return "?";
}

// Order in which worker clusters pick tasks. NonLMT runs uncapped, where the
// order provably does not matter; the rest sort by descending center x,
// average ability, or total ability, ties by ascending id. Random shuffles
// with the given seed.
inline std::vector<int> traversal_sequence(std::span<const WorkerCluster> workers,
                                           const TraversalOrder& order) {
  std::vector<int> seq(workers.size());
  for (std::size_t i = 0; i < workers.size(); ++i) seq[i] = workers[i].id;
  std::sort(seq.begin(), seq.end());

  auto by_descending = [&](auto key) {
    std::vector<std::pair<double, int>> keyed;
    keyed.reserve(workers.size());
    for (const WorkerCluster& w : workers) keyed.emplace_back(key(w), w.id);
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    for (std::size_t i = 0; i < keyed.size(); ++i) seq[i] = keyed[i].second;
  };

  switch (order.kind) {
    case TraversalOrder::Kind::NonLmt:
      break;
    case TraversalOrder::Kind::Random: {
      SplitRng rng(order.seed);
      rng.shuffle(seq);
      break;
    }
    case TraversalOrder::Kind::Xcoord:
      by_descending([](const WorkerCluster& w) { return static_cast<double>(w.center.x); });
      break;
    case TraversalOrder::Kind::AvgAbility:
      by_descending([](const WorkerCluster& w) { return worker_value(w, ValueBasis::Avg); });
      break;
    case TraversalOrder::Kind::SumAbility:
      by_descending([](const WorkerCluster& w) { return worker_value(w, ValueBasis::Sum); });
      break;
  }
  return seq;
}

inline constexpr int kUncapped = std::numeric_limits<int>::max();

struct Assignment {
  int worker_cluster = -1;
  int task_cluster = -1;
  double value = 0.0;
};

struct AllocationResult {
  std::vector<Assignment> assignments;
  std::vector<int> unmatched_workers;
  std::map<int, int> allocation_counts;  // per task cluster
};

// Single greedy pass: each worker cluster in sequence takes its
// minimum-matching-value task among those still under the cap (value ties go
// to the lower task id); worker clusters with no available candidate stay
// unmatched. `initial_counts` lets a multi-pass driver carry state forward.
inline AllocationResult allocate(const MatchingTable& table, std::span<const int> sequence,
                                 int cap, const std::map<int, int>* initial_counts = nullptr) {
  if (cap < 1) throw Error("allocation cap must be positive");
  AllocationResult result;
  if (initial_counts) result.allocation_counts = *initial_counts;

  // Candidate lists per worker cluster, pre-sorted by (value, task id).
  std::map<int, std::vector<std::pair<double, int>>> candidates;
  for (const auto& [key, value] : table.values) {
    candidates[key.first].emplace_back(value, key.second);
  }
  for (auto& [worker, list] : candidates) std::sort(list.begin(), list.end());

  for (int worker : sequence) {
    auto it = candidates.find(worker);
    const std::pair<double, int>* best = nullptr;
    if (it != candidates.end()) {
      for (const auto& cand : it->second) {
        auto count = result.allocation_counts.find(cand.second);
        if (count != result.allocation_counts.end() && count->second >= cap) continue;
        best = &cand;
        break;
      }
    }
    if (!best) {
      result.unmatched_workers.push_back(worker);
      continue;
    }
    result.assignments.push_back({worker, best->second, best->first});
    ++result.allocation_counts[best->second];
  }
  return result;
}

}  // namespace crowdalloc
