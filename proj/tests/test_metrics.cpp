#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "crowdalloc/metrics.hpp"

using namespace crowdalloc;

namespace {

TaskCluster tasks_of(int id, std::vector<double> rewards) {
  TaskCluster c;
  c.id = id;
  for (double r : rewards) c.members.push_back({"t", {0, 0}, r});
  return c;
}

WorkerCluster workers_of(int id, std::vector<double> abilities) {
  WorkerCluster c;
  c.id = id;
  for (double a : abilities) c.members.push_back({"w", {0, 0}, a});
  return c;
}

}  // namespace

TEST_CASE("indicator computation") {
  PayoffModel model;

  SECTION("task allocation rate counts member tasks of assigned clusters") {
    std::vector<TaskCluster> tasks{tasks_of(0, {1, 1, 1, 1}), tasks_of(1, {1, 1, 1, 1, 1, 1})};
    std::vector<WorkerCluster> workers{workers_of(0, {2.0})};
    AllocationResult r;
    r.assignments.push_back({0, 0, 1.0});
    r.allocation_counts[0] = 1;
    IndicatorReport rep = compute_indicators(r, tasks, workers, model);
    CHECK(rep.task_allocation_rate == Catch::Approx(0.4).margin(1e-12));
    CHECK(rep.worker_utilization_rate == Catch::Approx(1.0).margin(1e-12));
  }

  SECTION("no assignments means all-zero indicators") {
    std::vector<TaskCluster> tasks{tasks_of(0, {3, 4})};
    std::vector<WorkerCluster> workers{workers_of(0, {2.0}), workers_of(1, {5.0})};
    AllocationResult r;
    r.unmatched_workers = {0, 1};
    IndicatorReport rep = compute_indicators(r, tasks, workers, model);
    CHECK(rep.task_allocation_rate == 0.0);
    CHECK(rep.worker_utilization_rate == 0.0);
    CHECK(rep.total_requester_payoff == 0.0);
    CHECK(rep.total_worker_payoff == 0.0);
    CHECK(rep.requester_payoff_variance == 0.0);
    CHECK(rep.worker_payoff_variance == 0.0);
  }

  SECTION("even-split worker share") {
    // Rewards sum to 12, split across a 3-worker cluster: 4 each.
    std::vector<TaskCluster> tasks{tasks_of(0, {5, 7})};
    std::vector<WorkerCluster> workers{workers_of(0, {1.0, 2.0, 3.0})};
    AllocationResult r;
    r.assignments.push_back({0, 0, 1.0});
    r.allocation_counts[0] = 1;
    IndicatorReport rep = compute_indicators(r, tasks, workers, model);
    CHECK(rep.total_worker_payoff == Catch::Approx(12.0).margin(1e-12));
    CHECK(rep.worker_payoff_variance == Catch::Approx(0.0).margin(1e-12));
    // Each of the two tasks receives the mean ability 2.0.
    CHECK(rep.total_requester_payoff == Catch::Approx(4.0).margin(1e-12));
  }

  SECTION("conservation of transferred rewards") {
    std::vector<TaskCluster> tasks{tasks_of(0, {2, 3}), tasks_of(1, {10})};
    std::vector<WorkerCluster> workers{workers_of(0, {1, 1}), workers_of(1, {4})};
    AllocationResult r;
    r.assignments.push_back({0, 1, 1.0});
    r.assignments.push_back({1, 0, 1.5});
    r.allocation_counts[1] = 1;
    r.allocation_counts[0] = 1;
    IndicatorReport rep = compute_indicators(r, tasks, workers, model);
    CHECK(rep.total_worker_payoff == Catch::Approx(10.0 + 5.0).margin(1e-12));
    CHECK(rep.task_allocation_rate == 1.0);
    CHECK(rep.worker_utilization_rate == 1.0);
  }

  SECTION("variance is zero only when individual payoffs are equal") {
    std::vector<TaskCluster> tasks{tasks_of(0, {6}), tasks_of(1, {6})};
    std::vector<WorkerCluster> workers{workers_of(0, {2}), workers_of(1, {2})};
    AllocationResult r;
    r.assignments.push_back({0, 0, 1.0});
    r.assignments.push_back({1, 1, 1.0});
    r.allocation_counts[0] = 1;
    r.allocation_counts[1] = 1;
    IndicatorReport rep = compute_indicators(r, tasks, workers, model);
    CHECK(rep.worker_payoff_variance == Catch::Approx(0.0).margin(1e-12));
    CHECK(rep.requester_payoff_variance == Catch::Approx(0.0).margin(1e-12));

    AllocationResult partial;
    partial.assignments.push_back({0, 0, 1.0});
    partial.allocation_counts[0] = 1;
    IndicatorReport uneven = compute_indicators(partial, tasks, workers, model);
    CHECK(uneven.worker_payoff_variance > 0.0);
    CHECK(uneven.requester_payoff_variance > 0.0);
  }

  SECTION("unknown cluster ids are rejected") {
    std::vector<TaskCluster> tasks{tasks_of(0, {6})};
    std::vector<WorkerCluster> workers{workers_of(0, {2})};
    AllocationResult r;
    r.assignments.push_back({0, 9, 1.0});
    CHECK_THROWS_AS(compute_indicators(r, tasks, workers, PayoffModel{}), InconsistentIds);
  }
}

TEST_CASE("standardization against a baseline scheme") {
  auto report = [](double rate, double util, double rp, double wp, double rv, double wv) {
    IndicatorReport r;
    r.task_allocation_rate = rate;
    r.worker_utilization_rate = util;
    r.total_requester_payoff = rp;
    r.total_worker_payoff = wp;
    r.requester_payoff_variance = rv;
    r.worker_payoff_variance = wv;
    return r;
  };

  std::map<std::string, IndicatorReport> reports{
      {"Random", report(0.5, 0.6, 100, 80, 9, 4)},
      {"Xcoord", report(0.4, 0.7, 150, 160, 18, 2)},
      {"AVG", report(0.6, 0.5, 100, 40, 9, 1)},
  };

  auto standardized = standardize(reports, "Random");

  SECTION("the baseline maps to exactly one") {
    const IndicatorReport& b = standardized.at("Random");
    CHECK(b.total_requester_payoff == 1.0);
    CHECK(b.total_worker_payoff == 1.0);
    CHECK(b.requester_payoff_variance == 1.0);
    CHECK(b.worker_payoff_variance == 1.0);
    CHECK(b.task_allocation_rate == 0.5);
    CHECK(b.worker_utilization_rate == 0.6);
  }

  SECTION("ratios and pass-through rates") {
    const IndicatorReport& x = standardized.at("Xcoord");
    CHECK(x.total_requester_payoff == Catch::Approx(1.5));
    CHECK(x.total_worker_payoff == Catch::Approx(2.0));
    CHECK(x.requester_payoff_variance == Catch::Approx(2.0));
    CHECK(x.worker_payoff_variance == Catch::Approx(0.5));
    CHECK(x.task_allocation_rate == 0.4);
  }

  SECTION("elementwise division over the whole grid") {
    const IndicatorReport& base = reports.at("Random");
    for (const auto& [scheme, r] : reports) {
      const IndicatorReport& s = standardized.at(scheme);
      CHECK(s.total_requester_payoff ==
            Catch::Approx(r.total_requester_payoff / base.total_requester_payoff));
      CHECK(s.total_worker_payoff ==
            Catch::Approx(r.total_worker_payoff / base.total_worker_payoff));
    }
  }

  SECTION("missing or zero baseline") {
    CHECK_THROWS_AS(standardize(reports, "nope"), Error);
    std::map<std::string, IndicatorReport> zeroed{{"Random", report(0, 0, 0, 0, 0, 0)}};
    CHECK_THROWS_AS(standardize(zeroed, "Random"), ZeroBaseline);
  }
}
