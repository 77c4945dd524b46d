#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "crowdalloc/csv.hpp"
#include "crowdalloc/errors.hpp"
#include "crowdalloc/evaluation.hpp"
#include "crowdalloc/geo.hpp"
#include "crowdalloc/matching.hpp"
#include "crowdalloc/metrics.hpp"

namespace crowdalloc {

inline BoundingBox parse_box(std::string_view text, std::size_t line_no = 0) {
  std::vector<std::string> parts = split_csv_line(text);
  if (parts.size() != 4) throw ParseError(line_no, "box needs minlat,minlon,maxlat,maxlon");
  BoundingBox box;
  auto take = [&](const std::string& s) {
    auto v = parse_double(trim(s));
    if (!v) throw ParseError(line_no, "bad box coordinate: " + s);
    return *v;
  };
  box.min_lat = take(parts[0]);
  box.min_lon = take(parts[1]);
  box.max_lat = take(parts[2]);
  box.max_lon = take(parts[3]);
  if (box.min_lat >= box.max_lat || box.min_lon >= box.max_lon)
    throw ParseError(line_no, "box minimum must be below maximum");
  return box;
}

inline std::string box_to_string(const BoundingBox& b) {
  return format_double(b.min_lat) + "," + format_double(b.min_lon) + "," +
         format_double(b.max_lat) + "," + format_double(b.max_lon);
}

// Flat key = value configuration, '#' starts a comment. Every knob of the
// engine lives here; to_text() echoes the resolved values so each run
// records exactly what it executed.
struct RunConfig {
  std::uint64_t seed = 42;
  BoundingBox box{30.65, 104.04, 30.72, 104.12};

  double task_eps_m = 200.0;
  int task_min_pts = 5;
  double traj_eps_m = 300.0;  // trajectory-to-location reduction
  int traj_min_pts = 3;
  int worker_k = 0;  // 0: ceil(sqrt(worker count))
  double ability_weight = 1.0;

  int layers = 2;
  EvalWeights weights{1.0, 1.0, 1.0};
  EvalBasis basis{ValueBasis::Sum, ValueBasis::Sum};
  TraversalOrder::Kind order = TraversalOrder::Kind::AvgAbility;
  double w = 0.2;
  int cap = 15;  // kUncapped for no limit
  int passes = 1;
  RankConvention rank_convention = kDefaultRankConvention;
  PayoffModel payoff;

  // Distributions for attributes missing from ingested data.
  double reward_mean = 3000.0;
  double reward_std = 900.0;
  double ability_mean = 2000.0;
  double ability_std = 600.0;

  int effective_worker_k(std::size_t worker_count) const {
    if (worker_k > 0) return worker_k;
    int k = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(worker_count))));
    return std::max(1, k);
  }

  // NonLMT runs uncapped regardless of the configured cap.
  int effective_cap() const { return order == TraversalOrder::Kind::NonLmt ? kUncapped : cap; }
};

namespace detail {

inline TraversalOrder::Kind parse_order(std::string_view v, std::size_t line_no) {
  if (v == "NonLMT" || v == "nonlmt" || v == "NONLMT") return TraversalOrder::Kind::NonLmt;
  if (v == "Random" || v == "random" || v == "RANDOM") return TraversalOrder::Kind::Random;
  if (v == "Xcoord" || v == "xcoord" || v == "XCOORD") return TraversalOrder::Kind::Xcoord;
  if (v == "AVG" || v == "avg") return TraversalOrder::Kind::AvgAbility;
  if (v == "SUM" || v == "sum") return TraversalOrder::Kind::SumAbility;
  throw ParseError(line_no, "unknown traversal order: " + std::string(v));
}

inline ValueBasis parse_basis(std::string_view v, std::size_t line_no) {
  if (v == "AVG" || v == "avg") return ValueBasis::Avg;
  if (v == "SUM" || v == "sum") return ValueBasis::Sum;
  throw ParseError(line_no, "basis must be AVG or SUM, got: " + std::string(v));
}

struct KvLine {
  std::string key;
  std::string value;
  std::size_t line_no;
};

inline std::vector<KvLine> parse_kv_text(std::string_view text) {
  std::vector<KvLine> out;
  std::vector<std::string> lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(i + 1, "expected key = value");
    out.push_back({std::string(trim(line.substr(0, eq))),
                   std::string(trim(line.substr(eq + 1))), i + 1});
  }
  return out;
}

inline double need_double(const KvLine& kv) {
  auto v = parse_double(kv.value);
  if (!v) throw ParseError(kv.line_no, "bad number for " + kv.key + ": " + kv.value);
  return *v;
}

inline std::int64_t need_int(const KvLine& kv) {
  auto v = parse_int(kv.value);
  if (!v) throw ParseError(kv.line_no, "bad integer for " + kv.key + ": " + kv.value);
  return *v;
}

}  // namespace detail

inline RunConfig parse_run_config(std::string_view text) {
  RunConfig c;
  for (const detail::KvLine& kv : detail::parse_kv_text(text)) {
    if (kv.key == "seed") {
      c.seed = static_cast<std::uint64_t>(detail::need_int(kv));
    } else if (kv.key == "box") {
      c.box = parse_box(kv.value, kv.line_no);
    } else if (kv.key == "task_eps_m") {
      c.task_eps_m = detail::need_double(kv);
    } else if (kv.key == "task_min_pts") {
      c.task_min_pts = static_cast<int>(detail::need_int(kv));
    } else if (kv.key == "traj_eps_m") {
      c.traj_eps_m = detail::need_double(kv);
    } else if (kv.key == "traj_min_pts") {
      c.traj_min_pts = static_cast<int>(detail::need_int(kv));
    } else if (kv.key == "worker_k") {
      c.worker_k = static_cast<int>(detail::need_int(kv));
    } else if (kv.key == "ability_weight") {
      c.ability_weight = detail::need_double(kv);
    } else if (kv.key == "layers") {
      c.layers = static_cast<int>(detail::need_int(kv));
    } else if (kv.key == "alpha") {
      c.weights.alpha = detail::need_double(kv);
    } else if (kv.key == "beta") {
      c.weights.beta = detail::need_double(kv);
    } else if (kv.key == "gamma") {
      c.weights.gamma = detail::need_double(kv);
    } else if (kv.key == "task_basis") {
      c.basis.task_side = detail::parse_basis(kv.value, kv.line_no);
    } else if (kv.key == "worker_basis") {
      c.basis.worker_side = detail::parse_basis(kv.value, kv.line_no);
    } else if (kv.key == "order") {
      c.order = detail::parse_order(kv.value, kv.line_no);
    } else if (kv.key == "w") {
      c.w = detail::need_double(kv);
      if (c.w < 0.0 || c.w > 1.0) throw ParseError(kv.line_no, "w must lie in [0,1]");
    } else if (kv.key == "cap") {
      if (kv.value == "inf") {
        c.cap = kUncapped;
      } else {
        c.cap = static_cast<int>(detail::need_int(kv));
        if (c.cap < 1) throw ParseError(kv.line_no, "cap must be positive or inf");
      }
    } else if (kv.key == "passes") {
      c.passes = static_cast<int>(detail::need_int(kv));
      if (c.passes < 1) throw ParseError(kv.line_no, "passes must be positive");
    } else if (kv.key == "rank_convention") {
      if (kv.value == "task_rank") {
        c.rank_convention = RankConvention::WeightTaskRank;
      } else if (kv.value == "worker_rank") {
        c.rank_convention = RankConvention::WeightWorkerRank;
      } else {
        throw ParseError(kv.line_no, "rank_convention must be task_rank or worker_rank");
      }
    } else if (kv.key == "payoff_worker_share") {
      if (kv.value == "even_split") {
        c.payoff.worker_share = PayoffModel::WorkerShare::EvenSplit;
      } else if (kv.value == "full") {
        c.payoff.worker_share = PayoffModel::WorkerShare::Full;
      } else {
        throw ParseError(kv.line_no, "payoff_worker_share must be even_split or full");
      }
    } else if (kv.key == "payoff_quality") {
      if (kv.value == "mean") {
        c.payoff.quality = PayoffModel::RequesterQuality::MeanAbility;
      } else if (kv.value == "sum") {
        c.payoff.quality = PayoffModel::RequesterQuality::SumAbility;
      } else {
        throw ParseError(kv.line_no, "payoff_quality must be mean or sum");
      }
    } else if (kv.key == "reward_mean") {
      c.reward_mean = detail::need_double(kv);
    } else if (kv.key == "reward_std") {
      c.reward_std = detail::need_double(kv);
    } else if (kv.key == "ability_mean") {
      c.ability_mean = detail::need_double(kv);
    } else if (kv.key == "ability_std") {
      c.ability_std = detail::need_double(kv);
    } else {
      throw ParseError(kv.line_no, "unknown configuration key: " + kv.key);
    }
  }
  return c;
}

inline std::string to_text(const RunConfig& c) {
  std::ostringstream os;
  os << "seed = " << c.seed << '\n';
  os << "box = " << box_to_string(c.box) << '\n';
  os << "task_eps_m = " << format_double(c.task_eps_m) << '\n';
  os << "task_min_pts = " << c.task_min_pts << '\n';
  os << "traj_eps_m = " << format_double(c.traj_eps_m) << '\n';
  os << "traj_min_pts = " << c.traj_min_pts << '\n';
  os << "worker_k = " << c.worker_k << '\n';
  os << "ability_weight = " << format_double(c.ability_weight) << '\n';
  os << "layers = " << c.layers << '\n';
  os << "alpha = " << format_double(c.weights.alpha) << '\n';
  os << "beta = " << format_double(c.weights.beta) << '\n';
  os << "gamma = " << format_double(c.weights.gamma) << '\n';
  os << "task_basis = " << to_string(c.basis.task_side) << '\n';
  os << "worker_basis = " << to_string(c.basis.worker_side) << '\n';
  os << "order = " << to_string(c.order) << '\n';
  os << "w = " << format_double(c.w) << '\n';
  os << "cap = " << (c.cap == kUncapped ? std::string("inf") : std::to_string(c.cap)) << '\n';
  os << "passes = " << c.passes << '\n';
  os << "rank_convention = "
     << (c.rank_convention == RankConvention::WeightTaskRank ? "task_rank" : "worker_rank")
     << '\n';
  os << "payoff_worker_share = "
     << (c.payoff.worker_share == PayoffModel::WorkerShare::EvenSplit ? "even_split" : "full")
     << '\n';
  os << "payoff_quality = "
     << (c.payoff.quality == PayoffModel::RequesterQuality::MeanAbility ? "mean" : "sum") << '\n';
  os << "reward_mean = " << format_double(c.reward_mean) << '\n';
  os << "reward_std = " << format_double(c.reward_std) << '\n';
  os << "ability_mean = " << format_double(c.ability_mean) << '\n';
  os << "ability_std = " << format_double(c.ability_std) << '\n';
  return os.str();
}

// Spatial mixture component. Center in geographic degrees, isotropic normal
// spread in meters; draws falling outside the box are resampled. Task
// components can scale the reward distribution of their tasks, which models
// region-level value differences (premium downtown jobs versus bulk
// peripheral ones); worker components ignore the field.
struct MixtureComponent {
  double lat = 0.0;
  double lon = 0.0;
  double spread_m = 0.0;
  double weight = 1.0;
  double reward_scale = 1.0;
};

struct SyntheticSpec {
  int task_count = 5000;
  int worker_count = 2000;
  std::uint64_t seed = 42;
  BoundingBox box{30.65, 104.04, 30.72, 104.12};
  std::vector<MixtureComponent> task_components;
  std::vector<MixtureComponent> worker_components;
  double reward_mean = 3000.0;
  double reward_std = 900.0;
  double ability_mean = 2000.0;
  double ability_std = 600.0;
};

namespace detail {

inline MixtureComponent parse_component(std::string_view v, std::size_t line_no) {
  std::vector<std::string> parts = split_csv_line(v);
  if (parts.size() != 4 && parts.size() != 5)
    throw ParseError(line_no, "component needs lat,lon,spread_m,weight[,reward_scale]");
  MixtureComponent c;
  auto take = [&](const std::string& s) {
    auto d = parse_double(trim(s));
    if (!d) throw ParseError(line_no, "bad component value: " + s);
    return *d;
  };
  c.lat = take(parts[0]);
  c.lon = take(parts[1]);
  c.spread_m = take(parts[2]);
  c.weight = take(parts[3]);
  if (parts.size() == 5) c.reward_scale = take(parts[4]);
  if (c.spread_m < 0.0 || c.weight <= 0.0 || c.reward_scale <= 0.0)
    throw ParseError(line_no, "component spread must be >= 0, weight and reward_scale > 0");
  return c;
}

}  // namespace detail

inline SyntheticSpec parse_synthetic_spec(std::string_view text) {
  SyntheticSpec s;
  s.task_components.clear();
  s.worker_components.clear();
  for (const detail::KvLine& kv : detail::parse_kv_text(text)) {
    if (kv.key == "task_count") {
      s.task_count = static_cast<int>(detail::need_int(kv));
    } else if (kv.key == "worker_count") {
      s.worker_count = static_cast<int>(detail::need_int(kv));
    } else if (kv.key == "seed") {
      s.seed = static_cast<std::uint64_t>(detail::need_int(kv));
    } else if (kv.key == "box") {
      s.box = parse_box(kv.value, kv.line_no);
    } else if (kv.key == "task_component") {
      s.task_components.push_back(detail::parse_component(kv.value, kv.line_no));
    } else if (kv.key == "worker_component") {
      s.worker_components.push_back(detail::parse_component(kv.value, kv.line_no));
    } else if (kv.key == "reward_mean") {
      s.reward_mean = detail::need_double(kv);
    } else if (kv.key == "reward_std") {
      s.reward_std = detail::need_double(kv);
    } else if (kv.key == "ability_mean") {
      s.ability_mean = detail::need_double(kv);
    } else if (kv.key == "ability_std") {
      s.ability_std = detail::need_double(kv);
    } else {
      throw ParseError(kv.line_no, "unknown synthetic spec key: " + kv.key);
    }
  }
  if (s.task_count <= 0 || s.worker_count <= 0)
    throw Error("synthetic spec needs positive counts");
  if (s.reward_std <= 0.0 || s.ability_std <= 0.0)
    throw Error("synthetic spec needs positive standard deviations");
  return s;
}

// Heterogeneous reference workload. Two tiny premium task clusters sit
// inside the worker core and draw fierce competition; a ring of mid-size
// hotspots with moderate rewards surrounds them; a thin scatter covers the
// whole city. Workers crowd the core with small pockets near the corners.
// The uneven value and density structure leaves the allocation dynamics room
// to move: tight caps push competition off the premium clusters into the
// ring, and the matching weight shifts picks between premium and nearby
// work.
inline SyntheticSpec default_synthetic_spec(std::uint64_t seed = 42) {
  SyntheticSpec s;
  s.seed = seed;
  s.reward_mean = 3000.0;
  s.reward_std = 450.0;
  s.ability_mean = 5.0;
  s.ability_std = 1.5;
  const BoundingBox& b = s.box;
  auto at = [&](double flat, double flon, double spread, double weight, double scale = 1.0) {
    return MixtureComponent{b.min_lat + flat * (b.max_lat - b.min_lat),
                            b.min_lon + flon * (b.max_lon - b.min_lon), spread, weight, scale};
  };

  // Premium micro-clusters in the heart of the core.
  s.task_components.push_back(at(0.460, 0.460, 60.0, 0.0096, 4.0));
  s.task_components.push_back(at(0.540, 0.540, 60.0, 0.0096, 4.0));

  // Mid hotspots on jittered rings around the core.
  SplitRng layout(0xC0FFEE);
  const double scales[5] = {0.7, 0.8, 0.9, 1.0, 1.1};
  const int kMidCount = 36;
  for (int i = 0; i < kMidCount; ++i) {
    double slot = static_cast<double>(i) + 0.35 * layout.uniform01();
    double angle = 6.283185307179586 * slot / kMidCount;
    double radius = 0.11 + 0.12 * layout.uniform01();  // box fraction
    double flat = 0.5 + radius * std::sin(angle);
    double flon = 0.5 + radius * std::cos(angle) * 1.015;  // box is nearly square
    s.task_components.push_back(at(flat, flon, 75.0, 0.0203, scales[i % 5]));
  }

  // Thin scatter across the whole city.
  s.task_components.push_back(at(0.50, 0.50, 4500.0, 0.25, 0.85));

  s.worker_components = {
      at(0.500, 0.500, 420.0, 0.44),
      at(0.515, 0.535, 360.0, 0.20),
      at(0.470, 0.520, 300.0, 0.14),
      at(0.150, 0.150, 350.0, 0.055),
      at(0.150, 0.850, 350.0, 0.055),
      at(0.850, 0.150, 350.0, 0.055),
      at(0.850, 0.850, 350.0, 0.055),
  };
  return s;
}

inline std::string to_text(const SyntheticSpec& s) {
  std::ostringstream os;
  os << "task_count = " << s.task_count << '\n';
  os << "worker_count = " << s.worker_count << '\n';
  os << "seed = " << s.seed << '\n';
  os << "box = " << box_to_string(s.box) << '\n';
  for (const MixtureComponent& c : s.task_components) {
    os << "task_component = " << format_double(c.lat) << ',' << format_double(c.lon) << ','
       << format_double(c.spread_m) << ',' << format_double(c.weight) << ','
       << format_double(c.reward_scale) << '\n';
  }
  for (const MixtureComponent& c : s.worker_components) {
    os << "worker_component = " << format_double(c.lat) << ',' << format_double(c.lon) << ','
       << format_double(c.spread_m) << ',' << format_double(c.weight) << '\n';
  }
  os << "reward_mean = " << format_double(s.reward_mean) << '\n';
  os << "reward_std = " << format_double(s.reward_std) << '\n';
  os << "ability_mean = " << format_double(s.ability_mean) << '\n';
  os << "ability_std = " << format_double(s.ability_std) << '\n';
  return os.str();
}

}  // namespace crowdalloc
