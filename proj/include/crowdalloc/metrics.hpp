#pragma once

#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "crowdalloc/clustering.hpp"
#include "crowdalloc/errors.hpp"
#include "crowdalloc/matching.hpp"

namespace crowdalloc {

// How value moves along an assignment. Worker share: every worker in an
// assigned cluster receives the task cluster's reward sum, either split
// evenly across the cluster or in full. Requester quality: every task in an
// assigned cluster receives the worker cluster's mean or total ability, once
// per assignment.
struct PayoffModel {
  enum class WorkerShare { EvenSplit, Full };
  enum class RequesterQuality { MeanAbility, SumAbility };
  WorkerShare worker_share = WorkerShare::EvenSplit;
  RequesterQuality quality = RequesterQuality::MeanAbility;
};

struct IndicatorReport {
  double task_allocation_rate = 0.0;      // tasks in assigned clusters / all tasks
  double worker_utilization_rate = 0.0;   // workers in matched clusters / all workers
  double total_requester_payoff = 0.0;
  double total_worker_payoff = 0.0;
  double requester_payoff_variance = 0.0;  // population variance, zeros included
  double worker_payoff_variance = 0.0;
};

namespace detail {

inline double population_variance(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return var / static_cast<double>(values.size());
}

}  // namespace detail

inline IndicatorReport compute_indicators(const AllocationResult& result,
                                          std::span<const TaskCluster> tasks,
                                          std::span<const WorkerCluster> workers,
                                          const PayoffModel& model) {
  std::unordered_map<int, const TaskCluster*> task_by_id;
  std::unordered_map<int, const WorkerCluster*> worker_by_id;
  std::size_t total_tasks = 0, total_workers = 0;
  for (const TaskCluster& c : tasks) {
    task_by_id[c.id] = &c;
    total_tasks += c.members.size();
  }
  for (const WorkerCluster& c : workers) {
    worker_by_id[c.id] = &c;
    total_workers += c.members.size();
  }

  // Individual payoffs, zero for everyone in unassigned clusters.
  std::unordered_map<int, double> task_cluster_gain;    // per member task
  std::unordered_map<int, double> worker_cluster_gain;  // per member worker
  std::size_t assigned_tasks = 0, matched_workers = 0;

  for (const Assignment& a : result.assignments) {
    auto t = task_by_id.find(a.task_cluster);
    auto w = worker_by_id.find(a.worker_cluster);
    if (t == task_by_id.end() || w == worker_by_id.end())
      throw InconsistentIds("assignment references an unknown cluster id");
    const TaskCluster& tc = *t->second;
    const WorkerCluster& wc = *w->second;

    double reward_sum = 0.0;
    for (const Task& task : tc.members) reward_sum += task.reward;
    double share = model.worker_share == PayoffModel::WorkerShare::EvenSplit
                       ? reward_sum / static_cast<double>(wc.members.size())
                       : reward_sum;
    worker_cluster_gain[a.worker_cluster] += share;

    double ability_sum = 0.0;
    for (const Worker& worker : wc.members) ability_sum += worker.ability;
    double quality = model.quality == PayoffModel::RequesterQuality::MeanAbility
                         ? ability_sum / static_cast<double>(wc.members.size())
                         : ability_sum;
    task_cluster_gain[a.task_cluster] += quality;
  }

  for (const auto& [id, count] : result.allocation_counts) {
    if (count <= 0) continue;
    auto t = task_by_id.find(id);
    if (t == task_by_id.end()) throw InconsistentIds("allocation count for unknown task cluster");
    assigned_tasks += t->second->members.size();
  }
  for (const auto& [id, gain] : worker_cluster_gain) {
    matched_workers += worker_by_id.at(id)->members.size();
  }

  std::vector<double> task_payoffs;
  task_payoffs.reserve(total_tasks);
  for (const TaskCluster& c : tasks) {
    auto gain = task_cluster_gain.find(c.id);
    double per_task = gain == task_cluster_gain.end() ? 0.0 : gain->second;
    for (std::size_t i = 0; i < c.members.size(); ++i) task_payoffs.push_back(per_task);
  }
  std::vector<double> worker_payoffs;
  worker_payoffs.reserve(total_workers);
  for (const WorkerCluster& c : workers) {
    auto gain = worker_cluster_gain.find(c.id);
    double per_worker = gain == worker_cluster_gain.end() ? 0.0 : gain->second;
    for (std::size_t i = 0; i < c.members.size(); ++i) worker_payoffs.push_back(per_worker);
  }

  IndicatorReport report;
  report.task_allocation_rate =
      total_tasks == 0 ? 0.0 : static_cast<double>(assigned_tasks) / total_tasks;
  report.worker_utilization_rate =
      total_workers == 0 ? 0.0 : static_cast<double>(matched_workers) / total_workers;
  for (double v : task_payoffs) report.total_requester_payoff += v;
  for (double v : worker_payoffs) report.total_worker_payoff += v;
  report.requester_payoff_variance = detail::population_variance(task_payoffs);
  report.worker_payoff_variance = detail::population_variance(worker_payoffs);
  return report;
}

// Standardized view against a baseline scheme (the random-order traversal in
// the experiment protocol): the four payoff indicators become ratios to the
// baseline, the two rates pass through unchanged.
inline std::map<std::string, IndicatorReport> standardize(
    const std::map<std::string, IndicatorReport>& reports, const std::string& baseline) {
  auto base = reports.find(baseline);
  if (base == reports.end()) throw Error("baseline scheme missing: " + baseline);
  const IndicatorReport& b = base->second;
  if (b.total_requester_payoff == 0.0 || b.total_worker_payoff == 0.0 ||
      b.requester_payoff_variance == 0.0 || b.worker_payoff_variance == 0.0) {
    throw ZeroBaseline("baseline payoff indicator is zero");
  }
  std::map<std::string, IndicatorReport> out;
  for (const auto& [scheme, r] : reports) {
    IndicatorReport s = r;
    s.total_requester_payoff /= b.total_requester_payoff;
    s.total_worker_payoff /= b.total_worker_payoff;
    s.requester_payoff_variance /= b.requester_payoff_variance;
    s.worker_payoff_variance /= b.worker_payoff_variance;
    out[scheme] = s;
  }
  return out;
}

}  // namespace crowdalloc
