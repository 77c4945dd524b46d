#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "crowdalloc/clustering.hpp"
#include "crowdalloc/reference.hpp"
#include "crowdalloc/rng.hpp"

using namespace crowdalloc;

namespace {

Task task_at_meters(int n, double mx, double my, double reward = 1.0) {
  return {"t" + std::to_string(n), point_from_meters(mx, my), reward};
}

Worker worker_at_meters(int n, double mx, double my, double ability) {
  return {"w" + std::to_string(n), point_from_meters(mx, my), ability};
}

std::map<int, std::set<std::string>> cluster_member_sets(const std::vector<TaskCluster>& cs) {
  std::map<int, std::set<std::string>> out;
  for (const TaskCluster& c : cs) {
    for (const Task& t : c.members) out[c.id].insert(t.id);
  }
  return out;
}

}  // namespace

TEST_CASE("task clustering") {
  SECTION("two tight groups far apart") {
    std::vector<Task> tasks;
    int n = 0;
    for (int i = 0; i < 5; ++i) tasks.push_back(task_at_meters(n++, i * 10.0, 0.0));
    for (int i = 0; i < 5; ++i) tasks.push_back(task_at_meters(n++, 10000.0 + i * 10.0, 0.0));
    auto clusters = cluster_tasks(tasks, 100.0, 3);
    REQUIRE(clusters.size() == 2);
    CHECK(clusters[0].members.size() == 5);
    CHECK(clusters[1].members.size() == 5);
  }

  SECTION("no core points leaves only singletons") {
    std::vector<Task> tasks;
    for (int i = 0; i < 6; ++i) tasks.push_back(task_at_meters(i, i * 500.0, 0.0));
    auto clusters = cluster_tasks(tasks, 100.0, 2);
    CHECK(clusters.size() == 6);
    for (const auto& c : clusters) CHECK(c.members.size() == 1);
  }

  SECTION("empty input") {
    std::vector<Task> none;
    CHECK_THROWS_AS(cluster_tasks(none, 100.0, 3), EmptyInput);
  }

  SECTION("mixture labels match the quadratic reference implementation") {
    SplitRng rng(17);
    std::vector<Task> tasks;
    double centers[4][2] = {{0, 0}, {2000, 300}, {-1500, 1800}, {500, -2500}};
    for (int i = 0; i < 200; ++i) {
      int c = static_cast<int>(rng.bounded(4));
      tasks.push_back(task_at_meters(i, centers[c][0] + rng.normal(0, 80.0),
                                     centers[c][1] + rng.normal(0, 80.0)));
    }
    auto clusters = cluster_tasks(tasks, 150.0, 4);

    std::vector<PlanarPoint> pts;
    for (const Task& t : tasks) pts.push_back(t.location);
    std::vector<int> expected = reference::dbscan(pts, 150.0 * kUnitsPerMeter, 4);

    std::vector<int> actual(tasks.size(), -1);
    for (const TaskCluster& c : clusters) {
      for (const Task& t : c.members) {
        std::size_t idx = std::stoul(t.id.substr(1));
        actual[idx] = c.id;
      }
    }
    CHECK(actual == expected);
  }

  SECTION("partition property") {
    SplitRng rng(29);
    std::vector<Task> tasks;
    for (int i = 0; i < 120; ++i) {
      tasks.push_back(task_at_meters(i, rng.uniform(-3000, 3000), rng.uniform(-3000, 3000)));
    }
    auto clusters = cluster_tasks(tasks, 200.0, 5);
    std::set<std::string> seen;
    std::size_t total = 0;
    for (const auto& c : clusters) {
      CHECK_FALSE(c.members.empty());
      total += c.members.size();
      for (const Task& t : c.members) seen.insert(t.id);
    }
    CHECK(total == tasks.size());
    CHECK(seen.size() == tasks.size());
    CHECK(cluster_member_sets(clusters) == cluster_member_sets(cluster_tasks(tasks, 200.0, 5)));
  }
}

TEST_CASE("worker clustering") {
  SECTION("two spatial groups with disjoint ability ranges") {
    std::vector<Worker> workers;
    int n = 0;
    for (int i = 0; i < 8; ++i) workers.push_back(worker_at_meters(n++, i * 5.0, 0.0, 1.0 + 0.01 * i));
    for (int i = 0; i < 8; ++i)
      workers.push_back(worker_at_meters(n++, 5000.0 + i * 5.0, 0.0, 9.0 + 0.01 * i));
    auto clusters = cluster_workers(workers, 2, 1.0, 42);
    REQUIRE(clusters.size() == 2);
    for (const auto& c : clusters) {
      REQUIRE(c.members.size() == 8);
      bool low_group = c.members.front().ability < 5.0;
      for (const Worker& w : c.members) CHECK((w.ability < 5.0) == low_group);
    }
  }

  SECTION("zero ability weight makes the partition purely spatial") {
    std::vector<Worker> workers;
    for (int i = 0; i < 12; ++i) {
      workers.push_back(worker_at_meters(i, (i < 6 ? 0.0 : 4000.0) + i, 2.0 * i, 1.0 + i));
    }
    auto baseline = cluster_workers(workers, 2, 0.0, 7);

    std::vector<Worker> permuted = workers;
    std::vector<double> abilities;
    for (const Worker& w : permuted) abilities.push_back(w.ability);
    std::rotate(abilities.begin(), abilities.begin() + 5, abilities.end());
    for (std::size_t i = 0; i < permuted.size(); ++i) permuted[i].ability = abilities[i];
    auto shuffled = cluster_workers(permuted, 2, 0.0, 7);

    auto id_sets = [](const std::vector<WorkerCluster>& cs) {
      std::set<std::set<std::string>> out;
      for (const auto& c : cs) {
        std::set<std::string> ids;
        for (const Worker& w : c.members) ids.insert(w.id);
        out.insert(ids);
      }
      return out;
    };
    CHECK(id_sets(baseline) == id_sets(shuffled));
  }

  SECTION("k equal to the worker count gives singletons") {
    std::vector<Worker> workers;
    for (int i = 0; i < 9; ++i) workers.push_back(worker_at_meters(i, 13.0 * i, 7.0 * i, 1.0 + i));
    auto clusters = cluster_workers(workers, 9, 1.0, 3);
    REQUIRE(clusters.size() == 9);
    for (const auto& c : clusters) {
      CHECK(c.members.size() == 1);
      CHECK(c.center == c.members.front().location);  // zero within-cluster spread
    }
  }

  SECTION("k larger than the pool is rejected") {
    std::vector<Worker> workers{worker_at_meters(0, 0, 0, 1.0)};
    CHECK_THROWS_AS(cluster_workers(workers, 2, 1.0, 1), KTooLarge);
  }

  SECTION("objective is non-increasing across iterations") {
    SplitRng rng(61);
    std::vector<Worker> workers;
    for (int i = 0; i < 150; ++i) {
      workers.push_back(worker_at_meters(i, rng.uniform(-5000, 5000), rng.uniform(-5000, 5000),
                                         rng.positive_normal(5.0, 2.0)));
    }
    std::vector<double> trace;
    (void)cluster_workers(workers, 12, 1.0, 99, &trace);
    REQUIRE(trace.size() >= 2);
    for (std::size_t i = 1; i < trace.size(); ++i) {
      CHECK(trace[i] <= trace[i - 1] + 1e-9);
    }
  }

  SECTION("deterministic given the seed") {
    SplitRng rng(81);
    std::vector<Worker> workers;
    for (int i = 0; i < 60; ++i) {
      workers.push_back(worker_at_meters(i, rng.uniform(-2000, 2000), rng.uniform(-2000, 2000),
                                         rng.positive_normal(4.0, 1.0)));
    }
    auto a = cluster_workers(workers, 7, 1.0, 123);
    auto b = cluster_workers(workers, 7, 1.0, 123);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].center == b[i].center);
      CHECK(a[i].members.size() == b[i].members.size());
    }
  }
}

TEST_CASE("trajectory reduction") {
  SECTION("constant trajectory") {
    std::vector<PlanarPoint> traj(5, point_from_meters(12.0, -7.0));
    CHECK(trajectory_to_location(traj, 500.0, 5) == point_from_meters(12.0, -7.0));
  }

  SECTION("home cluster dominates distant outliers") {
    SplitRng rng(3);
    std::vector<PlanarPoint> traj;
    for (int i = 0; i < 90; ++i) {
      traj.push_back(point_from_meters(rng.uniform(-100, 100), rng.uniform(-100, 100)));
    }
    for (int i = 0; i < 10; ++i) {
      traj.push_back(point_from_meters(50000.0 + rng.uniform(-100, 100), rng.uniform(-100, 100)));
    }
    PlanarPoint loc = trajectory_to_location(traj, 500.0, 5);
    std::vector<PlanarPoint> home(traj.begin(), traj.begin() + 90);
    Circle mec = min_enclosing_circle(home);
    CHECK(loc.x == std::llround(mec.cx));
    CHECK(loc.y == std::llround(mec.cy));
  }

  SECTION("composition of the reference clusterer and the MEC oracle") {
    SplitRng rng(19);
    std::vector<PlanarPoint> traj;
    for (int i = 0; i < 100; ++i) {
      double cx = i % 3 == 0 ? 0.0 : 3000.0;
      traj.push_back(point_from_meters(cx + rng.normal(0, 60.0), rng.normal(0, 60.0)));
    }
    PlanarPoint loc = trajectory_to_location(traj, 200.0, 4);

    std::vector<int> labels = reference::dbscan(traj, 200.0 * kUnitsPerMeter, 4);
    std::map<int, std::vector<PlanarPoint>> groups;
    for (std::size_t i = 0; i < traj.size(); ++i) groups[labels[i]].push_back(traj[i]);
    int best = 0;
    for (const auto& [id, members] : groups) {
      if (members.size() > groups[best].size()) best = id;
    }
    Circle mec = reference::brute_force_mec(groups[best]);
    CHECK(std::abs(loc.x - std::llround(mec.cx)) <= 1);
    CHECK(std::abs(loc.y - std::llround(mec.cy)) <= 1);
  }

  SECTION("empty trajectory") {
    std::vector<PlanarPoint> none;
    CHECK_THROWS_AS(trajectory_to_location(none, 100.0, 3), EmptyInput);
  }
}

TEST_CASE("cluster centers") {
  CHECK(cluster_center(std::vector<PlanarPoint>{{0, 0}}) == PlanarPoint{0, 0});
  CHECK(cluster_center(std::vector<PlanarPoint>{{0, 0}, {2, 0}}) == PlanarPoint{1, 0});

  SECTION("matches the cubic oracle within one grid unit") {
    SplitRng rng(47);
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<PlanarPoint> pts;
      std::set<PlanarPoint> seen;
      while (pts.size() < 10) {
        PlanarPoint p{static_cast<std::int64_t>(rng.bounded(20000)) - 10000,
                      static_cast<std::int64_t>(rng.bounded(20000)) - 10000};
        if (seen.insert(p).second) pts.push_back(p);
      }
      PlanarPoint center = cluster_center(pts);
      Circle oracle = reference::brute_force_mec(pts);
      CHECK(std::abs(center.x - std::llround(oracle.cx)) <= 1);
      CHECK(std::abs(center.y - std::llround(oracle.cy)) <= 1);
      // The center must cover every member within the oracle radius.
      for (const PlanarPoint& p : pts) {
        CHECK(distance_units(center, p) <= oracle.radius * (1.0 + 1e-6) + 1.5);
      }
    }
  }

  SECTION("empty member list") {
    std::vector<PlanarPoint> none;
    CHECK_THROWS_AS(cluster_center(none), EmptyInput);
  }
}
