#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "crowdalloc/clustering.hpp"
#include "crowdalloc/config.hpp"
#include "crowdalloc/csv.hpp"
#include "crowdalloc/errors.hpp"
#include "crowdalloc/evaluation.hpp"
#include "crowdalloc/geo.hpp"
#include "crowdalloc/matching.hpp"
#include "crowdalloc/metrics.hpp"
#include "crowdalloc/ncgraph.hpp"
#include "crowdalloc/rng.hpp"

namespace crowdalloc {

struct Dataset {
  std::vector<Task> tasks;
  std::vector<Worker> workers;
};

struct IngestStats {
  std::size_t rows = 0;
  std::size_t dropped_outside_box = 0;
  std::size_t dropped_duplicates = 0;
};

namespace detail {

// Attribute draws are keyed by entity id, so they do not depend on row order
// and survive a round trip through the canonical CSV format.
inline double keyed_positive_normal(std::uint64_t stream, std::string_view id, double mean,
                                    double stddev) {
  SplitRng rng(derive_seed(stream, id));
  return rng.positive_normal(mean, stddev);
}

template <class F>
auto with_stage(const char* stage, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(std::string("[") + stage + "] " + e.what());
  }
}

}  // namespace detail

// CSV `id,lon,lat[,reward]`. Rows outside the box are dropped, rows landing
// on an occupied grid cell are dropped as duplicates, missing rewards come
// from the configured distribution keyed by task id.
inline std::vector<Task> ingest_tasks(const std::string& path, const RunConfig& config,
                                      IngestStats* stats = nullptr) {
  std::vector<std::string> lines = split_lines(read_file(path));
  if (lines.empty()) throw ParseError(1, "empty task file");
  std::vector<std::string> header = split_csv_line(lines[0]);
  if (header.size() < 3 || header[0] != "id" || header[1] != "lon" || header[2] != "lat")
    throw ParseError(1, "task header must be id,lon,lat[,reward]");
  bool has_reward = header.size() >= 4 && header[3] == "reward";

  Projection proj(config.box);
  std::uint64_t reward_stream = derive_seed(config.seed, "reward");
  std::unordered_set<PlanarPoint, PlanarPointHash> occupied;
  std::vector<Task> tasks;
  IngestStats local;

  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    ++local.rows;
    std::vector<std::string> f = split_csv_line(lines[i]);
    if (f.size() < 3 || f[0].empty()) throw ParseError(i + 1, "expected id,lon,lat[,reward]");
    auto lon = parse_double(f[1]);
    auto lat = parse_double(f[2]);
    if (!lon) throw ParseError(i + 1, "bad longitude: " + f[1]);
    if (!lat) throw ParseError(i + 1, "bad latitude: " + f[2]);
    if (!config.box.contains(*lat, *lon)) {
      ++local.dropped_outside_box;
      continue;
    }
    PlanarPoint p = proj.to_plane(*lat, *lon);
    if (!occupied.insert(p).second) {
      ++local.dropped_duplicates;
      continue;
    }
    double reward;
    if (has_reward && f.size() >= 4 && !f[3].empty()) {
      auto r = parse_double(f[3]);
      if (!r || *r <= 0.0) throw ParseError(i + 1, "bad reward: " + f[3]);
      reward = *r;
    } else {
      reward = detail::keyed_positive_normal(reward_stream, f[0], config.reward_mean,
                                             config.reward_std);
    }
    tasks.push_back({f[0], p, reward});
  }
  if (tasks.empty()) throw EmptyAfterFilter("no tasks inside the bounding box");
  if (stats) *stats = local;
  return tasks;
}

// CSV `driver_id,timestamp,lon,lat`. Points are grouped per driver in file
// order, exact duplicate (driver, grid cell) rows are dropped, and each
// trajectory reduces to the center of its dominant density cluster. Drivers
// whose representative location falls outside the box are dropped; abilities
// come from the configured distribution keyed by driver id.
inline std::vector<Worker> ingest_workers(const std::string& path, const RunConfig& config,
                                          IngestStats* stats = nullptr) {
  std::vector<std::string> lines = split_lines(read_file(path));
  if (lines.empty()) throw ParseError(1, "empty trajectory file");
  std::vector<std::string> header = split_csv_line(lines[0]);
  if (header.size() < 4 || header[0] != "driver_id" || header[1] != "timestamp" ||
      header[2] != "lon" || header[3] != "lat")
    throw ParseError(1, "trajectory header must be driver_id,timestamp,lon,lat");

  Projection proj(config.box);
  std::vector<std::string> driver_order;
  std::unordered_map<std::string, std::vector<PlanarPoint>> trajectories;
  std::unordered_map<std::string, std::unordered_set<PlanarPoint, PlanarPointHash>> seen;
  IngestStats local;

  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    ++local.rows;
    std::vector<std::string> f = split_csv_line(lines[i]);
    if (f.size() < 4 || f[0].empty())
      throw ParseError(i + 1, "expected driver_id,timestamp,lon,lat");
    auto lon = parse_double(f[2]);
    auto lat = parse_double(f[3]);
    if (!lon) throw ParseError(i + 1, "bad longitude: " + f[2]);
    if (!lat) throw ParseError(i + 1, "bad latitude: " + f[3]);
    PlanarPoint p = proj.to_plane(*lat, *lon);
    auto [it, inserted] = trajectories.try_emplace(f[0]);
    if (inserted) driver_order.push_back(f[0]);
    if (!seen[f[0]].insert(p).second) {
      ++local.dropped_duplicates;
      continue;
    }
    it->second.push_back(p);
  }

  std::uint64_t ability_stream = derive_seed(config.seed, "ability");
  std::vector<Worker> workers;
  std::unordered_set<PlanarPoint, PlanarPointHash> occupied;
  for (const std::string& driver : driver_order) {
    PlanarPoint loc =
        trajectory_to_location(trajectories[driver], config.traj_eps_m, config.traj_min_pts);
    double lat, lon;
    proj.to_geo(loc, lat, lon);
    if (!config.box.contains(lat, lon)) {
      ++local.dropped_outside_box;
      continue;
    }
    if (!occupied.insert(loc).second) {
      ++local.dropped_duplicates;
      continue;
    }
    workers.push_back({driver, loc,
                       detail::keyed_positive_normal(ability_stream, driver,
                                                     config.ability_mean, config.ability_std)});
  }
  if (workers.empty()) throw EmptyAfterFilter("no workers inside the bounding box");
  if (stats) *stats = local;
  return workers;
}

// Synthetic workload: locations drawn from the spatial mixture (resampled
// until they land inside the box on a free grid cell), rewards and abilities
// from truncated normal distributions keyed by entity id.
inline Dataset generate(const SyntheticSpec& spec) {
  if (spec.task_components.empty() || spec.worker_components.empty())
    throw Error("synthetic spec needs at least one component per entity type");

  Projection proj(spec.box);
  PlanarPoint lo = proj.to_plane(spec.box.min_lat, spec.box.min_lon);
  PlanarPoint hi = proj.to_plane(spec.box.max_lat, spec.box.max_lon);

  auto sample = [&](const std::vector<MixtureComponent>& components, SplitRng& rng,
                    std::unordered_set<PlanarPoint, PlanarPointHash>& occupied,
                    const MixtureComponent** chosen) {
    double total = 0.0;
    for (const MixtureComponent& c : components) total += c.weight;
    for (int attempt = 0; attempt < 10000; ++attempt) {
      double pick = rng.uniform01() * total;
      const MixtureComponent* comp = &components.back();
      for (const MixtureComponent& c : components) {
        if (pick < c.weight) {
          comp = &c;
          break;
        }
        pick -= c.weight;
      }
      PlanarPoint base = proj.to_plane(comp->lat, comp->lon);
      PlanarPoint p{base.x + std::llround(rng.normal(0.0, comp->spread_m * kUnitsPerMeter)),
                    base.y + std::llround(rng.normal(0.0, comp->spread_m * kUnitsPerMeter))};
      if (p.x < lo.x || p.x > hi.x || p.y < lo.y || p.y > hi.y) continue;
      if (!occupied.insert(p).second) continue;
      if (chosen) *chosen = comp;
      return p;
    }
    throw Error("could not place a synthetic point inside the box");
  };

  Dataset data;
  std::uint64_t reward_stream = derive_seed(spec.seed, "reward");
  std::uint64_t ability_stream = derive_seed(spec.seed, "ability");
  {
    SplitRng rng(derive_seed(spec.seed, "task-locations"));
    std::unordered_set<PlanarPoint, PlanarPointHash> occupied;
    for (int i = 0; i < spec.task_count; ++i) {
      std::string id = "t" + std::to_string(i + 1);
      const MixtureComponent* comp = nullptr;
      PlanarPoint p = sample(spec.task_components, rng, occupied, &comp);
      data.tasks.push_back(
          {id, p,
           detail::keyed_positive_normal(reward_stream, id, spec.reward_mean * comp->reward_scale,
                                         spec.reward_std * comp->reward_scale)});
    }
  }
  {
    SplitRng rng(derive_seed(spec.seed, "worker-locations"));
    std::unordered_set<PlanarPoint, PlanarPointHash> occupied;
    for (int i = 0; i < spec.worker_count; ++i) {
      std::string id = "w" + std::to_string(i + 1);
      PlanarPoint p = sample(spec.worker_components, rng, occupied, nullptr);
      data.workers.push_back({id, p, detail::keyed_positive_normal(ability_stream, id,
                                                                   spec.ability_mean,
                                                                   spec.ability_std)});
    }
  }
  return data;
}

// Canonical CSV emitters; re-ingesting these files with the same seed and
// configuration reproduces the same entity sets.
inline void write_tasks_csv(const std::string& path, std::span<const Task> tasks,
                            const Projection& proj) {
  std::ostringstream os;
  os << "id,lon,lat,reward\n";
  for (const Task& t : tasks) {
    double lat, lon;
    proj.to_geo(t.location, lat, lon);
    os << t.id << ',' << format_double(lon) << ',' << format_double(lat) << ','
       << format_double(t.reward) << '\n';
  }
  write_file(path, os.str());
}

inline void write_workers_csv(const std::string& path, std::span<const Worker> workers,
                              const Projection& proj) {
  std::ostringstream os;
  os << "driver_id,timestamp,lon,lat\n";
  for (const Worker& w : workers) {
    double lat, lon;
    proj.to_geo(w.location, lat, lon);
    os << w.id << ",0," << format_double(lon) << ',' << format_double(lat) << '\n';
  }
  write_file(path, os.str());
}

// ---------------------------------------------------------------------------
// Run artifacts

inline void write_task_clusters_csv(const std::string& path,
                                    std::span<const TaskCluster> clusters) {
  std::ostringstream os;
  os << "cluster_id,entity_id,x,y,value\n";
  for (const TaskCluster& c : clusters) {
    for (const Task& t : c.members) {
      os << c.id << ',' << t.id << ',' << t.location.x << ',' << t.location.y << ','
         << format_double(t.reward) << '\n';
    }
  }
  write_file(path, os.str());
}

inline void write_worker_clusters_csv(const std::string& path,
                                      std::span<const WorkerCluster> clusters) {
  std::ostringstream os;
  os << "cluster_id,entity_id,x,y,value\n";
  for (const WorkerCluster& c : clusters) {
    for (const Worker& w : c.members) {
      os << c.id << ',' << w.id << ',' << w.location.x << ',' << w.location.y << ','
         << format_double(w.ability) << '\n';
    }
  }
  write_file(path, os.str());
}

inline std::vector<TaskCluster> load_task_clusters_csv(const std::string& path) {
  std::vector<std::string> lines = split_lines(read_file(path));
  std::map<int, TaskCluster> clusters;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string> f = split_csv_line(lines[i]);
    if (f.size() != 5) throw ParseError(i + 1, "expected cluster_id,entity_id,x,y,value");
    int id = static_cast<int>(parse_int(f[0]).value());
    TaskCluster& c = clusters[id];
    c.id = id;
    c.members.push_back({f[1], {parse_int(f[2]).value(), parse_int(f[3]).value()},
                         parse_double(f[4]).value()});
  }
  std::vector<TaskCluster> out;
  for (auto& [id, c] : clusters) {
    std::vector<PlanarPoint> locs;
    for (const Task& t : c.members) locs.push_back(t.location);
    c.center = cluster_center(locs);
    out.push_back(std::move(c));
  }
  return out;
}

inline std::vector<WorkerCluster> load_worker_clusters_csv(const std::string& path) {
  std::vector<std::string> lines = split_lines(read_file(path));
  std::map<int, WorkerCluster> clusters;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string> f = split_csv_line(lines[i]);
    if (f.size() != 5) throw ParseError(i + 1, "expected cluster_id,entity_id,x,y,value");
    int id = static_cast<int>(parse_int(f[0]).value());
    WorkerCluster& c = clusters[id];
    c.id = id;
    c.members.push_back({f[1], {parse_int(f[2]).value(), parse_int(f[3]).value()},
                         parse_double(f[4]).value()});
  }
  std::vector<WorkerCluster> out;
  for (auto& [id, c] : clusters) {
    std::vector<PlanarPoint> locs;
    for (const Worker& w : c.members) locs.push_back(w.location);
    c.center = cluster_center(locs);
    out.push_back(std::move(c));
  }
  return out;
}

inline void write_ranked_csv(const std::string& path, const RankedAdjacency& ranked) {
  std::ostringstream os;
  os << "anchor_id,candidate_id,score,rank\n";
  for (const auto& [anchor, entries] : ranked.lists) {
    for (const RankedEntry& e : entries) {
      os << anchor << ',' << e.candidate << ',' << format_double(e.score) << ',' << e.rank
         << '\n';
    }
  }
  write_file(path, os.str());
}

inline RankedAdjacency load_ranked_csv(const std::string& path) {
  RankedAdjacency out;
  std::vector<std::string> lines = split_lines(read_file(path));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string> f = split_csv_line(lines[i]);
    if (f.size() != 4) throw ParseError(i + 1, "expected anchor_id,candidate_id,score,rank");
    out.lists[static_cast<int>(parse_int(f[0]).value())].push_back(
        {static_cast<int>(parse_int(f[1]).value()), parse_double(f[2]).value(),
         static_cast<int>(parse_int(f[3]).value())});
  }
  return out;
}

inline void write_table_csv(const std::string& path, const MatchingTable& table) {
  std::ostringstream os;
  os << "worker_cluster_id,task_cluster_id,value\n";
  for (const auto& [key, value] : table.values) {
    os << key.first << ',' << key.second << ',' << format_double(value) << '\n';
  }
  write_file(path, os.str());
}

inline MatchingTable load_table_csv(const std::string& path) {
  MatchingTable table;
  std::vector<std::string> lines = split_lines(read_file(path));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string> f = split_csv_line(lines[i]);
    if (f.size() != 3) throw ParseError(i + 1, "expected worker_cluster_id,task_cluster_id,value");
    table.values[{static_cast<int>(parse_int(f[0]).value()),
                  static_cast<int>(parse_int(f[1]).value())}] = parse_double(f[2]).value();
  }
  return table;
}

// Allocation dump; unmatched worker clusters appear with an empty task field.
inline void write_allocation_csv(const std::string& path, const AllocationResult& result) {
  std::ostringstream os;
  os << "worker_cluster_id,task_cluster_id,matching_value\n";
  for (const Assignment& a : result.assignments) {
    os << a.worker_cluster << ',' << a.task_cluster << ',' << format_double(a.value) << '\n';
  }
  for (int w : result.unmatched_workers) {
    os << w << ",,\n";
  }
  write_file(path, os.str());
}

inline AllocationResult load_allocation_csv(const std::string& path) {
  AllocationResult out;
  std::vector<std::string> lines = split_lines(read_file(path));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string> f = split_csv_line(lines[i]);
    if (f.size() != 3) throw ParseError(i + 1, "expected worker_cluster_id,task_cluster_id,value");
    int worker = static_cast<int>(parse_int(f[0]).value());
    if (f[1].empty()) {
      out.unmatched_workers.push_back(worker);
      continue;
    }
    int task = static_cast<int>(parse_int(f[1]).value());
    out.assignments.push_back({worker, task, parse_double(f[2]).value()});
    ++out.allocation_counts[task];
  }
  return out;
}

inline nlohmann::json indicators_to_json(const IndicatorReport& r) {
  return nlohmann::json{{"task_allocation_rate", r.task_allocation_rate},
                        {"worker_utilization_rate", r.worker_utilization_rate},
                        {"total_requester_payoff", r.total_requester_payoff},
                        {"total_worker_payoff", r.total_worker_payoff},
                        {"requester_payoff_variance", r.requester_payoff_variance},
                        {"worker_payoff_variance", r.worker_payoff_variance}};
}

inline void write_indicators_json(const std::string& path, const IndicatorReport& r,
                                  const RunConfig& config) {
  nlohmann::json config_echo = nlohmann::json::object();
  for (const detail::KvLine& kv : detail::parse_kv_text(to_text(config))) {
    config_echo[kv.key] = kv.value;
  }
  nlohmann::json doc{{"indicators", indicators_to_json(r)}, {"config", config_echo}};
  write_file(path, doc.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Pipeline

struct PipelineResult {
  std::vector<TaskCluster> task_clusters;
  std::vector<WorkerCluster> worker_clusters;
  AdjacencyLists adjacency;
  RankedPair ranked;
  MatchingTable table;
  std::vector<int> sequence;
  AllocationResult allocation;
  IndicatorReport indicators;
};

namespace detail {

inline AllocationResult run_allocation(const MatchingTable& table,
                                       std::span<const int> sequence, int cap, int passes) {
  AllocationResult total;
  std::vector<int> remaining(sequence.begin(), sequence.end());
  for (int pass = 0; pass < passes && !remaining.empty(); ++pass) {
    AllocationResult r = allocate(table, remaining, cap, &total.allocation_counts);
    total.allocation_counts = r.allocation_counts;
    for (const Assignment& a : r.assignments) total.assignments.push_back(a);
    remaining = r.unmatched_workers;
  }
  total.unmatched_workers = std::move(remaining);
  return total;
}

}  // namespace detail

inline void write_run_artifacts(const std::filesystem::path& dir, const RunConfig& config,
                                const PipelineResult& result) {
  std::filesystem::create_directories(dir);
  write_file((dir / "run_config.txt").string(), to_text(config));
  write_task_clusters_csv((dir / "task_clusters.csv").string(), result.task_clusters);
  write_worker_clusters_csv((dir / "worker_clusters.csv").string(), result.worker_clusters);

  std::vector<PlanarPoint> tcenters, wcenters;
  for (const TaskCluster& c : result.task_clusters) tcenters.push_back(c.center);
  for (const WorkerCluster& c : result.worker_clusters) wcenters.push_back(c.center);
  write_file((dir / "task_graph.txt").string(), build(tcenters).dump());
  write_file((dir / "worker_graph.txt").string(), build(wcenters).dump());

  write_ranked_csv((dir / "ranks_tasks_for_workers.csv").string(),
                   result.ranked.tasks_for_workers);
  write_ranked_csv((dir / "ranks_workers_for_tasks.csv").string(),
                   result.ranked.workers_for_tasks);
  write_table_csv((dir / "matching_table.csv").string(), result.table);
  write_allocation_csv((dir / "allocation.csv").string(), result.allocation);
  write_indicators_json((dir / "indicators.json").string(), result.indicators, config);
}

// Executes cluster -> reconfigure -> rank -> table -> traverse -> allocate ->
// indicators. Errors carry the failing stage in their message. When out_dir
// is given, every intermediate artifact is written there.
inline PipelineResult run_pipeline(const RunConfig& config, std::span<const Task> tasks,
                                   std::span<const Worker> workers,
                                   const std::filesystem::path* out_dir = nullptr) {
  PipelineResult r;
  detail::with_stage("clustering", [&] {
    r.task_clusters = cluster_tasks(tasks, config.task_eps_m, config.task_min_pts);
    r.worker_clusters =
        cluster_workers(workers, config.effective_worker_k(workers.size()),
                        config.ability_weight, derive_seed(config.seed, "kmeans"));
    return 0;
  });
  detail::with_stage("reconfigure", [&] {
    r.adjacency = reconfigure(r.task_clusters, r.worker_clusters, config.layers);
    return 0;
  });
  detail::with_stage("evaluate", [&] {
    r.ranked = rank_candidates(r.adjacency, r.task_clusters, r.worker_clusters, config.weights,
                               config.basis);
    return 0;
  });
  detail::with_stage("match", [&] {
    r.table = build_table(r.ranked, config.w, config.rank_convention);
    return 0;
  });
  detail::with_stage("traverse", [&] {
    TraversalOrder order{config.order, derive_seed(config.seed, "traversal")};
    r.sequence = traversal_sequence(r.worker_clusters, order);
    return 0;
  });
  detail::with_stage("allocate", [&] {
    r.allocation =
        detail::run_allocation(r.table, r.sequence, config.effective_cap(), config.passes);
    return 0;
  });
  detail::with_stage("indicators", [&] {
    r.indicators =
        compute_indicators(r.allocation, r.task_clusters, r.worker_clusters, config.payoff);
    return 0;
  });
  if (out_dir) write_run_artifacts(*out_dir, config, r);
  return r;
}

// ---------------------------------------------------------------------------
// Experiment stages

inline std::string cell_key(int layers, const EvalBasis& basis, TraversalOrder::Kind order) {
  return "L" + std::to_string(layers) + "_" + to_string(basis.task_side) + "-" +
         to_string(basis.worker_side) + "_" + to_string(order);
}

struct Stage1Cell {
  int layers;
  EvalBasis basis;
  TraversalOrder::Kind order;
  int cap;
  IndicatorReport report;
};

struct Stage1Report {
  std::vector<Stage1Cell> cells;
  // Standardized payoffs per (layers, basis) group, keyed by traversal name.
  std::map<std::string, std::map<std::string, IndicatorReport>> standardized;
};

// Stage 1 of the experiment protocol: the full grid of five traversal
// orders, four evaluation bases, and one- versus two-layer adjacency, run at
// w = 0.5 with a cap of 15 (uncapped for NonLMT). Clustering and the
// per-layer/per-basis intermediates are shared across the grid.
inline Stage1Report run_stage1(const RunConfig& base, std::span<const Task> tasks,
                               std::span<const Worker> workers,
                               const std::filesystem::path* out_dir = nullptr) {
  RunConfig cfg = base;
  cfg.w = 0.5;
  cfg.cap = 15;

  std::vector<TaskCluster> tc;
  std::vector<WorkerCluster> wc;
  detail::with_stage("clustering", [&] {
    tc = cluster_tasks(tasks, cfg.task_eps_m, cfg.task_min_pts);
    wc = cluster_workers(workers, cfg.effective_worker_k(workers.size()), cfg.ability_weight,
                         derive_seed(cfg.seed, "kmeans"));
    return 0;
  });

  const std::vector<ValueBasis> bases{ValueBasis::Avg, ValueBasis::Sum};
  const std::vector<TraversalOrder::Kind> orders{
      TraversalOrder::Kind::NonLmt, TraversalOrder::Kind::Random, TraversalOrder::Kind::Xcoord,
      TraversalOrder::Kind::AvgAbility, TraversalOrder::Kind::SumAbility};

  Stage1Report report;
  for (int layers : {1, 2}) {
    AdjacencyLists adjacency = detail::with_stage("reconfigure", [&] {
      return reconfigure(tc, wc, layers);
    });
    for (ValueBasis task_side : bases) {
      for (ValueBasis worker_side : bases) {
        EvalBasis basis{task_side, worker_side};
        RunConfig cell_cfg = cfg;
        cell_cfg.layers = layers;
        cell_cfg.basis = basis;

        RankedPair ranked = detail::with_stage("evaluate", [&] {
          return rank_candidates(adjacency, tc, wc, cfg.weights, basis);
        });
        MatchingTable table = detail::with_stage("match", [&] {
          return build_table(ranked, cfg.w, cfg.rank_convention);
        });

        std::map<std::string, IndicatorReport> group;
        for (TraversalOrder::Kind order : orders) {
          cell_cfg.order = order;
          TraversalOrder traversal{order, derive_seed(cfg.seed, "traversal")};
          std::vector<int> sequence = traversal_sequence(wc, traversal);
          AllocationResult allocation = detail::run_allocation(
              table, sequence, cell_cfg.effective_cap(), cell_cfg.passes);
          IndicatorReport indicators =
              compute_indicators(allocation, tc, wc, cfg.payoff);
          report.cells.push_back(
              {layers, basis, order, cell_cfg.effective_cap(), indicators});
          group[to_string(order)] = indicators;

          if (out_dir) {
            PipelineResult cell;
            cell.task_clusters = tc;
            cell.worker_clusters = wc;
            cell.adjacency = adjacency;
            cell.ranked = ranked;
            cell.table = table;
            cell.sequence = std::move(sequence);
            cell.allocation = std::move(allocation);
            cell.indicators = indicators;
            write_run_artifacts(*out_dir / "cells" / cell_key(layers, basis, order), cell_cfg,
                                cell);
          }
        }
        std::string group_key = "L" + std::to_string(layers) + "_" + to_string(task_side) +
                                "-" + to_string(worker_side);
        report.standardized[group_key] = standardize(group, "Random");
      }
    }
  }

  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    std::ostringstream grid;
    grid << "layers,task_basis,worker_basis,order,cap,task_allocation_rate,"
            "worker_utilization_rate,total_requester_payoff,total_worker_payoff,"
            "requester_payoff_variance,worker_payoff_variance\n";
    for (const Stage1Cell& c : report.cells) {
      grid << c.layers << ',' << to_string(c.basis.task_side) << ','
           << to_string(c.basis.worker_side) << ',' << to_string(c.order) << ','
           << (c.cap == kUncapped ? std::string("inf") : std::to_string(c.cap)) << ','
           << format_double(c.report.task_allocation_rate) << ','
           << format_double(c.report.worker_utilization_rate) << ','
           << format_double(c.report.total_requester_payoff) << ','
           << format_double(c.report.total_worker_payoff) << ','
           << format_double(c.report.requester_payoff_variance) << ','
           << format_double(c.report.worker_payoff_variance) << '\n';
    }
    write_file((*out_dir / "grid.csv").string(), grid.str());

    std::ostringstream std_csv;
    std_csv << "group,order,task_allocation_rate,worker_utilization_rate,"
               "std_total_requester_payoff,std_total_worker_payoff,"
               "std_requester_payoff_variance,std_worker_payoff_variance\n";
    for (const auto& [group, schemes] : report.standardized) {
      for (const auto& [order, s] : schemes) {
        std_csv << group << ',' << order << ',' << format_double(s.task_allocation_rate) << ','
                << format_double(s.worker_utilization_rate) << ','
                << format_double(s.total_requester_payoff) << ','
                << format_double(s.total_worker_payoff) << ','
                << format_double(s.requester_payoff_variance) << ','
                << format_double(s.worker_payoff_variance) << '\n';
      }
    }
    write_file((*out_dir / "standardized.csv").string(), std_csv.str());
  }
  return report;
}

struct Stage2Point {
  double w;
  IndicatorReport report;
};

// Default stage-2 configuration: two layers, AVG traversal, AVG-SUM basis.
inline RunConfig stage2_defaults(RunConfig base) {
  base.layers = 2;
  base.order = TraversalOrder::Kind::AvgAbility;
  base.basis = {ValueBasis::Avg, ValueBasis::Sum};
  return base;
}

inline std::vector<double> parse_w_grid(std::string_view text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t colon = text.find(':', start);
    if (colon == std::string_view::npos) {
      parts.emplace_back(text.substr(start));
      break;
    }
    parts.emplace_back(text.substr(start, colon - start));
    start = colon + 1;
  }
  if (parts.size() != 3) throw Error("w grid must be start:stop:step");
  double a = parse_double(parts[0]).value_or(-1);
  double b = parse_double(parts[1]).value_or(-1);
  double s = parse_double(parts[2]).value_or(0);
  if (a < 0 || b < a || s <= 0) throw Error("bad w grid: " + std::string(text));
  int n = static_cast<int>(std::llround((b - a) / s));
  std::vector<double> grid;
  for (int i = 0; i <= n; ++i) {
    double w = a + (b - a) * static_cast<double>(i) / std::max(1, n);
    if (w >= 0.0 && w <= 1.0) grid.push_back(w);
  }
  return grid;
}

inline std::vector<double> default_w_grid() { return parse_w_grid("0:1:0.1"); }

// Stage 2: sweep the matching weight over the grid with everything else
// fixed. Clustering, adjacency, and ranking are computed once; each w point
// rebuilds only the table and the allocation.
inline std::vector<Stage2Point> run_stage2(const RunConfig& config, std::span<const Task> tasks,
                                           std::span<const Worker> workers,
                                           std::span<const double> w_grid,
                                           const std::filesystem::path* out_dir = nullptr) {
  std::vector<TaskCluster> tc;
  std::vector<WorkerCluster> wc;
  detail::with_stage("clustering", [&] {
    tc = cluster_tasks(tasks, config.task_eps_m, config.task_min_pts);
    wc = cluster_workers(workers, config.effective_worker_k(workers.size()),
                         config.ability_weight, derive_seed(config.seed, "kmeans"));
    return 0;
  });
  AdjacencyLists adjacency = detail::with_stage("reconfigure", [&] {
    return reconfigure(tc, wc, config.layers);
  });
  RankedPair ranked = detail::with_stage("evaluate", [&] {
    return rank_candidates(adjacency, tc, wc, config.weights, config.basis);
  });
  TraversalOrder traversal{config.order, derive_seed(config.seed, "traversal")};
  std::vector<int> sequence = traversal_sequence(wc, traversal);

  std::vector<Stage2Point> points;
  for (double w : w_grid) {
    RunConfig cfg = config;
    cfg.w = w;
    MatchingTable table = build_table(ranked, w, cfg.rank_convention);
    AllocationResult allocation =
        detail::run_allocation(table, sequence, cfg.effective_cap(), cfg.passes);
    IndicatorReport indicators = compute_indicators(allocation, tc, wc, cfg.payoff);
    points.push_back({w, indicators});

    if (out_dir) {
      PipelineResult run;
      run.task_clusters = tc;
      run.worker_clusters = wc;
      run.adjacency = adjacency;
      run.ranked = ranked;
      run.table = std::move(table);
      run.sequence = sequence;
      run.allocation = std::move(allocation);
      run.indicators = indicators;
      write_run_artifacts(*out_dir / ("w_" + format_double(w)), cfg, run);
    }
  }

  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    std::ostringstream os;
    os << "w,task_allocation_rate,worker_utilization_rate,total_requester_payoff,"
          "total_worker_payoff,requester_payoff_variance,worker_payoff_variance\n";
    for (const Stage2Point& p : points) {
      os << format_double(p.w) << ',' << format_double(p.report.task_allocation_rate) << ','
         << format_double(p.report.worker_utilization_rate) << ','
         << format_double(p.report.total_requester_payoff) << ','
         << format_double(p.report.total_worker_payoff) << ','
         << format_double(p.report.requester_payoff_variance) << ','
         << format_double(p.report.worker_payoff_variance) << '\n';
    }
    write_file((*out_dir / "sweep.csv").string(), os.str());
  }
  return points;
}

}  // namespace crowdalloc
