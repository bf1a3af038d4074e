#pragma once

// Desk-scale sensitivity sweeps: sample (s, t) pairs, build the tree, run
// the planners and aggregate objective, planner wall time and the longest
// invitation chain per sweep point.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "apm/arborescence.hpp"
#include "apm/error.hpp"
#include "apm/graph.hpp"
#include "apm/planners.hpp"

namespace apm::bench {

enum class SweepVar { kBudget, kDistance, kFriendCount, kAlpha };

inline std::string_view to_string(SweepVar v) {
  switch (v) {
    case SweepVar::kBudget: return "budget";
    case SweepVar::kDistance: return "distance";
    case SweepVar::kFriendCount: return "friend_count";
    case SweepVar::kAlpha: return "alpha";
  }
  return "?";
}

inline SweepVar parse_sweep(std::string_view s) {
  if (s == "budget") return SweepVar::kBudget;
  if (s == "distance") return SweepVar::kDistance;
  if (s == "friend_count") return SweepVar::kFriendCount;
  if (s == "alpha") return SweepVar::kAlpha;
  throw DomainError("unknown sweep variable '" + std::string(s) + "'");
}

enum class HomophilyKind { kNone, kConstant, kZipf };

struct ExperimentSpec {
  // Graph source: a file when graph_file is set, otherwise the generator.
  std::string graph_file;
  bool undirected = false;
  std::size_t nodes = 10000;
  double avg_degree = 10.0;
  ZipfWeightConfig weights{1.0, 10, 0.9, 1};

  HomophilyKind homophily = HomophilyKind::kZipf;
  double homophily_value = 0.0;  // constant model
  double homophily_wmax = 0.3;   // zipf model; alpha follows the edge weights

  SweepVar sweep = SweepVar::kBudget;
  std::vector<double> values;
  std::size_t pairs_per_point = 20;
  std::uint64_t seed = 7;
  std::vector<Algorithm> algorithms{Algorithm::kSitina, Algorithm::kRangeGreedy};

  // Settings for the variables not being swept.
  std::size_t budget = 10;
  std::size_t distance = 3;  // 0: any target at distance >= 2
  std::size_t friends_min = 0, friends_max = 0;  // 0/0: no band
  double friend_band_slack = 0.2;  // friend_count sweep: band [v, v * (1 + slack)]
  double theta = 0.0;
  unsigned threads = 1;
};

struct ResultRow {
  SweepVar sweep_var = SweepVar::kBudget;
  double sweep_value = 0.0;
  Algorithm algorithm = Algorithm::kSitina;
  std::size_t n_pairs = 0;
  double mean_objective = 0.0;
  double stddev_objective = 0.0;
  double mean_runtime_ms = 0.0;
  double mean_longest_path = 0.0;
  std::size_t failures = 0;  // sampled pairs dropped before planning
};

// ---------------------------------------------------------------------------
// Spec file

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw DomainError("spec key '" + key + "': expected a number, got '" + v + "'");
}

inline std::uint64_t to_uint(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw DomainError("spec key '" + key + "': expected a non-negative integer, got '" + v + "'");
  return std::stoull(v);
}

}  // namespace detail

// key=value per line; see README for the keys.
inline ExperimentSpec parse_spec(std::istream& in) {
  ExperimentSpec spec;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected key=value");
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string val = detail::trim(t.substr(eq + 1));
    try {
      if (key == "graph") spec.graph_file = val;
      else if (key == "undirected") spec.undirected = val == "true" || val == "1";
      else if (key == "nodes") spec.nodes = detail::to_uint(key, val);
      else if (key == "avg_degree") spec.avg_degree = detail::to_double(key, val);
      else if (key == "alpha") spec.weights.alpha = detail::to_double(key, val);
      else if (key == "ranks") spec.weights.rank_count = static_cast<int>(detail::to_uint(key, val));
      else if (key == "w_max") spec.weights.w_max = detail::to_double(key, val);
      else if (key == "graph_seed") spec.weights.seed = detail::to_uint(key, val);
      else if (key == "homophily") {
        if (val == "none") spec.homophily = HomophilyKind::kNone;
        else if (val == "zipf") spec.homophily = HomophilyKind::kZipf;
        else {
          spec.homophily = HomophilyKind::kConstant;
          spec.homophily_value = detail::to_double(key, val);
        }
      } else if (key == "homophily_wmax") spec.homophily_wmax = detail::to_double(key, val);
      else if (key == "sweep") spec.sweep = parse_sweep(val);
      else if (key == "values") {
        spec.values.clear();
        for (const auto& v : detail::split_list(val)) spec.values.push_back(detail::to_double(key, v));
      } else if (key == "pairs") spec.pairs_per_point = detail::to_uint(key, val);
      else if (key == "seed") spec.seed = detail::to_uint(key, val);
      else if (key == "algorithms") {
        spec.algorithms.clear();
        for (const auto& a : detail::split_list(val)) spec.algorithms.push_back(parse_algorithm(a));
      } else if (key == "budget") spec.budget = detail::to_uint(key, val);
      else if (key == "distance") spec.distance = detail::to_uint(key, val);
      else if (key == "friends_min") spec.friends_min = detail::to_uint(key, val);
      else if (key == "friends_max") spec.friends_max = detail::to_uint(key, val);
      else if (key == "friend_band_slack") spec.friend_band_slack = detail::to_double(key, val);
      else if (key == "theta") spec.theta = detail::to_double(key, val);
      else if (key == "threads") spec.threads = static_cast<unsigned>(detail::to_uint(key, val));
      else throw DomainError("unknown spec key '" + key + "'");
    } catch (const DomainError& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return spec;
}

inline void validate(const ExperimentSpec& spec) {
  if (spec.values.empty()) throw DomainError("experiment needs at least one sweep value");
  if (spec.pairs_per_point < 1) throw DomainError("pairs per point must be >= 1");
  if (spec.algorithms.empty()) throw DomainError("experiment needs at least one algorithm");
  if (spec.sweep == SweepVar::kAlpha && !spec.graph_file.empty())
    throw DomainError("alpha sweeps need a generated graph, not a graph file");
}

// ---------------------------------------------------------------------------
// Pair sampling

struct PairConstraint {
  std::optional<std::size_t> distance;  // exact hop distance s -> t (>= 2)
  std::optional<std::pair<std::size_t, std::size_t>> friend_band;  // |S| - 1 range
};

struct SampledPair {
  NodeId source = 0;
  NodeId target = 0;
  FriendSet friends;
};

inline constexpr std::size_t kSampleRetries = 10000;

// s uniform (subject to the friend band), then t uniform among nodes at the
// requested distance, or at distance >= 2 when none is requested. S is the
// out-neighbourhood of s plus s.
template <typename Rng>
SampledPair sample_pair(const SocialGraph& g, const PairConstraint& c, Rng& rng) {
  if (g.node_count() < 2) throw DomainError("graph too small to sample a pair");
  if (c.distance && *c.distance < 2) throw DomainError("target distance must be >= 2 (distance 1 is already a friend)");
  std::uniform_int_distribution<Index> pick_s(0, static_cast<Index>(g.node_count() - 1));
  std::vector<Index> candidates;
  for (std::size_t attempt = 0; attempt < kSampleRetries; ++attempt) {
    const Index s = pick_s(rng);
    const std::size_t deg = g.out_arcs(s).size();
    if (c.friend_band && (deg < c.friend_band->first || deg > c.friend_band->second)) continue;
    const auto dist = hop_distances(g, s);
    candidates.clear();
    for (Index v = 0; v < g.node_count(); ++v) {
      if (dist[v] == kUnreachable) continue;
      const auto d = static_cast<std::size_t>(dist[v]);
      if (c.distance ? d == *c.distance : d >= 2) candidates.push_back(v);
    }
    if (candidates.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick_t(0, candidates.size() - 1);
    const Index t = candidates[pick_t(rng)];
    return {g.id_of(s), g.id_of(t), FriendSet::out_neighbours(g, g.id_of(s))};
  }
  throw DomainError("no (s, t) pair satisfies the constraint after " + std::to_string(kSampleRetries) + " tries");
}

inline SampledPair sample_pair(const SocialGraph& g, const PairConstraint& c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_pair(g, c, rng);
}

// ---------------------------------------------------------------------------
// Experiment

namespace detail {

struct PointSetup {
  const SocialGraph* graph;
  std::optional<HomophilyModel> homophily;
  PairConstraint constraint;
  std::size_t budget;
};

inline std::optional<HomophilyModel> make_homophily(const ExperimentSpec& spec, const SocialGraph& g,
                                                    double alpha) {
  switch (spec.homophily) {
    case HomophilyKind::kNone: return std::nullopt;
    case HomophilyKind::kConstant: return HomophilyModel::constant(spec.homophily_value);
    case HomophilyKind::kZipf: {
      ZipfWeightConfig cfg = spec.weights;
      cfg.alpha = alpha;
      cfg.w_max = spec.homophily_wmax;
      cfg.seed = spec.weights.seed ^ 0x5DEECE66DULL;
      return zipf_homophily(g, cfg);
    }
  }
  return std::nullopt;
}

inline SocialGraph load_or_generate(const ExperimentSpec& spec, double alpha) {
  if (!spec.graph_file.empty()) {
    std::ifstream in(spec.graph_file);
    if (!in) throw DomainError("cannot open graph file " + spec.graph_file);
    return load_edge_list(in, {spec.undirected});
  }
  ZipfWeightConfig cfg = spec.weights;
  cfg.alpha = alpha;
  return generate_synthetic(spec.nodes, spec.avg_degree, cfg);
}

inline double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

inline double stddev(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

}  // namespace detail

// One row per (sweep value, algorithm), in spec order. Every sweep point has
// its own RNG stream derived from (seed, point index), so results do not
// depend on the thread count. Sampled pairs whose tree cannot be built are
// logged, counted and replaced, up to 10x pairs_per_point attempts.
inline std::vector<ResultRow> run_experiment(const ExperimentSpec& spec, std::ostream* log = nullptr) {
  validate(spec);
  std::unique_ptr<SocialGraph> shared;
  std::optional<HomophilyModel> shared_h;
  if (spec.sweep != SweepVar::kAlpha) {
    shared = std::make_unique<SocialGraph>(detail::load_or_generate(spec, spec.weights.alpha));
    shared_h = detail::make_homophily(spec, *shared, spec.weights.alpha);
  }

  const std::size_t n_points = spec.values.size();
  const std::size_t n_algos = spec.algorithms.size();
  std::vector<ResultRow> rows(n_points * n_algos);
  std::mutex log_mu;

  auto run_point = [&](std::size_t p) {
    const double value = spec.values[p];
    std::unique_ptr<SocialGraph> own;
    std::optional<HomophilyModel> own_h;
    const SocialGraph* g = shared.get();
    const std::optional<HomophilyModel>* h = &shared_h;
    if (spec.sweep == SweepVar::kAlpha) {
      own = std::make_unique<SocialGraph>(detail::load_or_generate(spec, value));
      own_h = detail::make_homophily(spec, *own, value);
      g = own.get();
      h = &own_h;
    }

    PairConstraint c;
    if (spec.distance > 0) c.distance = spec.distance;
    if (spec.friends_max > 0) c.friend_band = std::make_pair(spec.friends_min, spec.friends_max);
    std::size_t budget = spec.budget;
    switch (spec.sweep) {
      case SweepVar::kBudget: budget = static_cast<std::size_t>(std::llround(value)); break;
      case SweepVar::kDistance: c.distance = static_cast<std::size_t>(std::llround(value)); break;
      case SweepVar::kFriendCount: {
        const auto lo = static_cast<std::size_t>(std::llround(value));
        const auto hi = static_cast<std::size_t>(std::llround(value * (1.0 + spec.friend_band_slack)));
        c.friend_band = std::make_pair(lo, std::max(lo, hi));
        break;
      }
      case SweepVar::kAlpha: break;
    }

    std::seed_seq sseq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                       static_cast<std::uint32_t>(p)};
    std::mt19937_64 rng(sseq);

    std::vector<std::vector<double>> obj(n_algos), ms(n_algos), path(n_algos);
    std::size_t failures = 0;
    std::size_t done = 0;
    for (std::size_t attempt = 0; done < spec.pairs_per_point && attempt < 10 * spec.pairs_per_point; ++attempt) {
      std::optional<Arborescence> tree;
      try {
        const SampledPair pair = sample_pair(*g, c, rng);
        tree = build_miia(*g, pair.friends, pair.target, spec.theta, *h);
      } catch (const DomainError& e) {
        ++failures;
        if (log) {
          std::lock_guard lock(log_mu);
          *log << "sweep " << to_string(spec.sweep) << "=" << value << ": sample dropped: " << e.what() << '\n';
        }
        continue;
      }
      for (std::size_t a = 0; a < n_algos; ++a) {
        const auto start = std::chrono::steady_clock::now();
        const InvitationPlan result = plan_on_tree(*tree, budget, spec.algorithms[a]);
        const auto stop = std::chrono::steady_clock::now();
        obj[a].push_back(result.objective);
        ms[a].push_back(std::chrono::duration<double, std::milli>(stop - start).count());
        path[a].push_back(static_cast<double>(result.longest_path));
      }
      ++done;
    }

    for (std::size_t a = 0; a < n_algos; ++a) {
      ResultRow& row = rows[p * n_algos + a];
      row.sweep_var = spec.sweep;
      row.sweep_value = value;
      row.algorithm = spec.algorithms[a];
      row.n_pairs = done;
      row.mean_objective = detail::mean(obj[a]);
      row.stddev_objective = detail::stddev(obj[a]);
      row.mean_runtime_ms = detail::mean(ms[a]);
      row.mean_longest_path = detail::mean(path[a]);
      row.failures = failures;
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(spec.threads, static_cast<unsigned>(n_points)));
  if (workers == 1) {
    for (std::size_t p = 0; p < n_points; ++p) run_point(p);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex err_mu;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t p; (p = next.fetch_add(1)) < n_points;) {
          try {
            run_point(p);
          } catch (...) {
            std::lock_guard lock(err_mu);
            if (!error) error = std::current_exception();
          }
        }
      });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }
  return rows;
}

inline void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  std::ostringstream buf;
  buf << "sweep_var,sweep_value,algorithm,n_pairs,mean_objective,stddev_objective,mean_runtime_ms,mean_longest_path\n";
  buf << std::setprecision(10);
  for (const auto& r : rows)
    buf << to_string(r.sweep_var) << ',' << r.sweep_value << ',' << to_string(r.algorithm) << ',' << r.n_pairs << ','
        << r.mean_objective << ',' << r.stddev_objective << ',' << r.mean_runtime_ms << ',' << r.mean_longest_path
        << '\n';
  out << buf.str();
}

}  // namespace apm::bench
