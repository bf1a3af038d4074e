#pragma once

// Social graph model: directed influence-weighted arcs, homophily model,
// friend sets, edge-list I/O, Zipf-weighted synthetic generation and
// breadth-first hop distances.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "apm/error.hpp"

namespace apm {

using NodeId = std::uint64_t;

// Dense internal index; ordered like the external ids.
using Index = std::uint32_t;

inline constexpr Index kNoIndex = std::numeric_limits<Index>::max();

class SocialGraph {
 public:
  struct Arc {
    Index node;
    double weight;
  };

  SocialGraph() = default;

  std::size_t node_count() const noexcept { return ids_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }

  const std::vector<NodeId>& ids() const noexcept { return ids_; }
  NodeId id_of(Index i) const { return ids_.at(i); }

  std::optional<Index> index_of(NodeId id) const {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id) return std::nullopt;
    return static_cast<Index>(it - ids_.begin());
  }

  bool contains(NodeId id) const { return index_of(id).has_value(); }

  // Index lookup that throws DomainError naming the missing id.
  Index require(NodeId id) const {
    auto i = index_of(id);
    if (!i) throw DomainError("node " + std::to_string(id) + " is not in the graph");
    return *i;
  }

  // Arcs leaving i, sorted by head index.
  std::span<const Arc> out_arcs(Index i) const {
    return {out_.data() + out_begin_[i], out_.data() + out_begin_[i + 1]};
  }

  // Arcs entering i (Arc::node is the tail), sorted by tail index.
  std::span<const Arc> in_arcs(Index i) const {
    return {in_.data() + in_begin_[i], in_.data() + in_begin_[i + 1]};
  }

  std::optional<double> arc_weight(Index u, Index v) const {
    auto arcs = out_arcs(u);
    auto it = std::lower_bound(arcs.begin(), arcs.end(), v, [](const Arc& a, Index x) { return a.node < x; });
    if (it == arcs.end() || it->node != v) return std::nullopt;
    return it->weight;
  }

  std::optional<double> weight(NodeId u, NodeId v) const {
    auto ui = index_of(u);
    auto vi = index_of(v);
    if (!ui || !vi) return std::nullopt;
    return arc_weight(*ui, *vi);
  }

  template <typename F>
  void for_each_edge(F&& fn) const {
    for (Index u = 0; u < node_count(); ++u)
      for (const Arc& a : out_arcs(u)) fn(ids_[u], ids_[a.node], a.weight);
  }

 private:
  friend class GraphBuilder;

  std::vector<NodeId> ids_;
  std::vector<std::size_t> out_begin_{0};
  std::vector<std::size_t> in_begin_{0};
  std::vector<Arc> out_;
  std::vector<Arc> in_;
  std::size_t edge_count_ = 0;
};

// Single-writer construction; build() freezes into an immutable SocialGraph.
class GraphBuilder {
 public:
  void add_node(NodeId id) { nodes_.insert(id); }

  void add_edge(NodeId u, NodeId v, double w) {
    if (u == v) throw DomainError("self-loop on node " + std::to_string(u));
    if (!(w >= 0.0 && w <= 1.0))
      throw DomainError("weight out of range [0,1] on edge " + std::to_string(u) + "->" +
                        std::to_string(v));
    if (!keys_.insert({u, v}).second)
      throw DomainError("duplicate edge " + std::to_string(u) + "->" + std::to_string(v));
    nodes_.insert(u);
    nodes_.insert(v);
    edges_.push_back({u, v, w});
  }

  bool has_edge(NodeId u, NodeId v) const { return keys_.count({u, v}) != 0; }

  SocialGraph build() && {
    SocialGraph g;
    g.ids_.assign(nodes_.begin(), nodes_.end());
    std::sort(g.ids_.begin(), g.ids_.end());
    const std::size_t n = g.ids_.size();

    auto idx = [&](NodeId id) {
      return static_cast<Index>(std::lower_bound(g.ids_.begin(), g.ids_.end(), id) - g.ids_.begin());
    };
    std::vector<std::size_t> out_deg(n, 0), in_deg(n, 0);
    std::vector<std::pair<Index, Index>> ends;
    ends.reserve(edges_.size());
    for (const auto& e : edges_) {
      Index u = idx(e.u), v = idx(e.v);
      ends.emplace_back(u, v);
      ++out_deg[u];
      ++in_deg[v];
    }
    g.out_begin_.assign(n + 1, 0);
    g.in_begin_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
      g.out_begin_[i + 1] = g.out_begin_[i] + out_deg[i];
      g.in_begin_[i + 1] = g.in_begin_[i] + in_deg[i];
    }
    g.out_.resize(edges_.size());
    g.in_.resize(edges_.size());
    std::vector<std::size_t> out_fill(g.out_begin_.begin(), g.out_begin_.end() - 1);
    std::vector<std::size_t> in_fill(g.in_begin_.begin(), g.in_begin_.end() - 1);
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      auto [u, v] = ends[e];
      g.out_[out_fill[u]++] = {v, edges_[e].w};
      g.in_[in_fill[v]++] = {u, edges_[e].w};
    }
    auto by_node = [](const SocialGraph::Arc& a, const SocialGraph::Arc& b) { return a.node < b.node; };
    for (std::size_t i = 0; i < n; ++i) {
      std::sort(g.out_.begin() + g.out_begin_[i], g.out_.begin() + g.out_begin_[i + 1], by_node);
      std::sort(g.in_.begin() + g.in_begin_[i], g.in_.begin() + g.in_begin_[i + 1], by_node);
    }
    g.edge_count_ = edges_.size();
    return g;
  }

 private:
  struct Edge {
    NodeId u, v;
    double w;
  };
  struct PairHash {
    std::size_t operator()(const std::pair<NodeId, NodeId>& p) const noexcept {
      return std::hash<NodeId>{}(p.first * 0x9E3779B97F4A7C15ULL ^ p.second);
    }
  };

  std::unordered_set<NodeId> nodes_;
  std::unordered_set<std::pair<NodeId, NodeId>, PairHash> keys_;
  std::vector<Edge> edges_;
};

// ---------------------------------------------------------------------------
// Edge-list text format

struct LoadOptions {
  // Expand every line "u v w" into the two arcs u->v and v->u.
  bool undirected = false;
};

namespace detail {

inline bool blank_or_comment(const std::string& line) {
  auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

inline bool parse_id(const std::string& tok, NodeId& out) {
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos) return false;
  try {
    out = std::stoull(tok);
  } catch (const std::exception&) {
    return false;
  }
  return true;
}

inline bool parse_prob_token(const std::string& tok, double& out) {
  try {
    std::size_t used = 0;
    out = std::stod(tok, &used);
    return used == tok.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace detail

inline SocialGraph load_edge_list(std::istream& in, LoadOptions opts = {}) {
  GraphBuilder builder;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::blank_or_comment(line)) continue;
    std::istringstream ss(line);
    std::string a, b, c, extra;
    NodeId u = 0, v = 0;
    double w = 0.0;
    if (!(ss >> a >> b >> c) || (ss >> extra) || !detail::parse_id(a, u) || !detail::parse_id(b, v) ||
        !detail::parse_prob_token(c, w))
      throw ParseError(lineno, "malformed edge line, expected \"u v w\": '" + line + "'");
    try {
      builder.add_edge(u, v, w);
      if (opts.undirected) builder.add_edge(v, u, w);
    } catch (const DomainError& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return std::move(builder).build();
}

inline void write_edge_list(std::ostream& out, const SocialGraph& g) {
  std::ostringstream buf;
  buf << std::setprecision(std::numeric_limits<double>::max_digits10);
  g.for_each_edge([&](NodeId u, NodeId v, double w) { buf << u << ' ' << v << ' ' << w << '\n'; });
  out << buf.str();
}

// One id per line, '#' comments and blank lines ignored.
inline std::vector<NodeId> load_id_list(std::istream& in) {
  std::vector<NodeId> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::blank_or_comment(line)) continue;
    std::istringstream ss(line);
    std::string tok, extra;
    NodeId id = 0;
    if (!(ss >> tok) || (ss >> extra) || !detail::parse_id(tok, id))
      throw ParseError(lineno, "expected a single node id: '" + line + "'");
    ids.push_back(id);
  }
  return ids;
}

// ---------------------------------------------------------------------------
// Homophily

// Probability h_{s,v} that v accepts s purely from profile similarity.
class HomophilyModel {
 public:
  HomophilyModel() : HomophilyModel(0.0) {}

  static HomophilyModel constant(double h) {
    check(h, "constant");
    return HomophilyModel(h);
  }

  static HomophilyModel per_node(std::unordered_map<NodeId, double> values) {
    for (const auto& [v, h] : values) check(h, std::to_string(v));
    HomophilyModel m;
    m.values_ = std::move(values);
    return m;
  }

  // Nodes missing from a per-node table have no homophily channel.
  double at(NodeId v) const {
    if (const auto* c = std::get_if<double>(&values_)) return *c;
    const auto& table = std::get<std::unordered_map<NodeId, double>>(values_);
    auto it = table.find(v);
    return it == table.end() ? 0.0 : it->second;
  }

 private:
  explicit HomophilyModel(double h) : values_(h) {}

  static void check(double h, const std::string& where) {
    if (!(h >= 0.0 && h <= 1.0)) throw DomainError("homophily value out of [0,1] for " + where);
  }

  std::variant<double, std::unordered_map<NodeId, double>> values_;
};

// "v h" per line.
inline HomophilyModel load_homophily(std::istream& in) {
  std::unordered_map<NodeId, double> table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::blank_or_comment(line)) continue;
    std::istringstream ss(line);
    std::string a, b, extra;
    NodeId v = 0;
    double h = 0.0;
    if (!(ss >> a >> b) || (ss >> extra) || !detail::parse_id(a, v) || !detail::parse_prob_token(b, h))
      throw ParseError(lineno, "expected \"v h\": '" + line + "'");
    if (!(h >= 0.0 && h <= 1.0)) throw ParseError(lineno, "homophily out of range [0,1]");
    if (!table.emplace(v, h).second) throw ParseError(lineno, "duplicate node " + a);
  }
  return HomophilyModel::per_node(std::move(table));
}

// ---------------------------------------------------------------------------
// Friend sets

// s together with s's existing friends. Always contains s.
class FriendSet {
 public:
  FriendSet(const SocialGraph& g, NodeId initiator, std::vector<NodeId> friends) : initiator_(initiator) {
    g.require(initiator);
    friends.push_back(initiator);
    std::sort(friends.begin(), friends.end());
    friends.erase(std::unique(friends.begin(), friends.end()), friends.end());
    for (NodeId f : friends) g.require(f);
    members_ = std::move(friends);
  }

  // S = out-neighbours of s, plus s.
  static FriendSet out_neighbours(const SocialGraph& g, NodeId initiator) {
    std::vector<NodeId> fr;
    for (const auto& a : g.out_arcs(g.require(initiator))) fr.push_back(g.id_of(a.node));
    return FriendSet(g, initiator, std::move(fr));
  }

  NodeId initiator() const noexcept { return initiator_; }
  const std::vector<NodeId>& members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }

  bool contains(NodeId v) const { return std::binary_search(members_.begin(), members_.end(), v); }

 private:
  NodeId initiator_;
  std::vector<NodeId> members_;
};

// ---------------------------------------------------------------------------
// Zipf weights and synthetic graphs

struct ZipfWeightConfig {
  double alpha = 1.0;
  int rank_count = 10;
  double w_max = 0.9;
  std::uint64_t seed = 1;
};

// Rank i in 1..K is drawn with probability proportional to i^-alpha. Rank i
// carries the weight w_max * (K + 1 - i)^-alpha, so the frequent ranks are the
// low-influence ones and rank K is w_max. alpha = 0 collapses every weight to
// w_max; larger alpha moves mass onto weak links.
class ZipfWeights {
 public:
  explicit ZipfWeights(const ZipfWeightConfig& cfg) : cfg_(cfg) {
    if (!(cfg.alpha >= 0.0) || !std::isfinite(cfg.alpha)) throw DomainError("zipf alpha must be >= 0");
    if (cfg.rank_count < 1) throw DomainError("zipf rank count must be positive");
    if (!(cfg.w_max > 0.0 && cfg.w_max <= 1.0)) throw DomainError("zipf w_max must be in (0,1]");
    cdf_.resize(static_cast<std::size_t>(cfg.rank_count));
    double acc = 0.0;
    for (int i = 1; i <= cfg.rank_count; ++i) {
      acc += std::pow(static_cast<double>(i), -cfg.alpha);
      cdf_[static_cast<std::size_t>(i - 1)] = acc;
    }
    for (double& c : cdf_) c /= acc;
    cdf_.back() = 1.0;
  }

  const ZipfWeightConfig& config() const noexcept { return cfg_; }

  // Inverse-CDF lookup for a uniform draw in [0,1).
  int rank_for(double u) const {
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<int>(it - cdf_.begin()) + 1;
  }

  double weight_of_rank(int rank) const {
    return cfg_.w_max * std::pow(static_cast<double>(cfg_.rank_count + 1 - rank), -cfg_.alpha);
  }

  double rank_probability(int rank) const {
    auto i = static_cast<std::size_t>(rank - 1);
    return i == 0 ? cdf_[0] : cdf_[i] - cdf_[i - 1];
  }

  template <typename Rng>
  int sample_rank(Rng& rng) const {
    return rank_for(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
  }

  template <typename Rng>
  double operator()(Rng& rng) const {
    return weight_of_rank(sample_rank(rng));
  }

 private:
  ZipfWeightConfig cfg_;
  std::vector<double> cdf_;
};

// Preferential-attachment friendship graph with mutual arcs, so it is weakly
// (in fact strongly) connected. Each new node links to round(avg_out_degree/2)
// distinct existing nodes, giving an average out-degree close to
// avg_out_degree. Topology depends only on the seed; arc weights come from a
// separate stream, so different alphas with one seed share the topology and
// the per-arc uniform draws.
inline SocialGraph generate_synthetic(std::size_t n_nodes, double avg_out_degree, const ZipfWeightConfig& cfg) {
  if (n_nodes < 2) throw DomainError("synthetic graph needs at least 2 nodes");
  if (!(avg_out_degree >= 1.0)) throw DomainError("average out-degree must be >= 1");
  ZipfWeights weights(cfg);

  auto links = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(avg_out_degree / 2.0)));
  links = std::min(links, n_nodes - 1);

  std::mt19937_64 topo(cfg.seed);
  std::mt19937_64 wrng(cfg.seed ^ 0xA5A5A5A55A5A5A5AULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  GraphBuilder b;
  std::vector<NodeId> endpoints;
  auto link = [&](NodeId u, NodeId v) {
    b.add_edge(u, v, weights.weight_of_rank(weights.rank_for(unit(wrng))));
    b.add_edge(v, u, weights.weight_of_rank(weights.rank_for(unit(wrng))));
    endpoints.push_back(u);
    endpoints.push_back(v);
  };

  // Seed clique over the first links+1 nodes.
  const std::size_t core = links + 1;
  for (NodeId u = 0; u < core; ++u)
    for (NodeId v = u + 1; v < core; ++v) link(u, v);

  std::vector<NodeId> picked;
  for (NodeId v = core; v < n_nodes; ++v) {
    picked.clear();
    while (picked.size() < links) {
      std::uniform_int_distribution<std::size_t> pick(0, endpoints.size() - 1);
      NodeId u = endpoints[pick(topo)];
      if (std::find(picked.begin(), picked.end(), u) == picked.end()) picked.push_back(u);
    }
    for (NodeId u : picked) link(v, u);
  }
  return std::move(b).build();
}

// Per-node homophily drawn from the same Zipf rank grid.
inline HomophilyModel zipf_homophily(const SocialGraph& g, const ZipfWeightConfig& cfg) {
  ZipfWeights weights(cfg);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::unordered_map<NodeId, double> table;
  table.reserve(g.node_count());
  for (NodeId id : g.ids()) table.emplace(id, weights.weight_of_rank(weights.rank_for(unit(rng))));
  return HomophilyModel::per_node(std::move(table));
}

// ---------------------------------------------------------------------------
// Hop distances

inline constexpr std::int32_t kUnreachable = -1;

// BFS hop counts from `from` over out-arcs (any weight), indexed by Index.
inline std::vector<std::int32_t> hop_distances(const SocialGraph& g, Index from) {
  std::vector<std::int32_t> dist(g.node_count(), kUnreachable);
  std::deque<Index> queue{from};
  dist[from] = 0;
  while (!queue.empty()) {
    Index u = queue.front();
    queue.pop_front();
    for (const auto& a : g.out_arcs(u)) {
      if (dist[a.node] != kUnreachable) continue;
      dist[a.node] = dist[u] + 1;
      queue.push_back(a.node);
    }
  }
  return dist;
}

inline std::optional<std::size_t> hop_distance(const SocialGraph& g, NodeId a, NodeId b) {
  Index ai = g.require(a), bi = g.require(b);
  if (ai == bi) return 0;
  auto d = hop_distances(g, ai)[bi];
  if (d == kUnreachable) return std::nullopt;
  return static_cast<std::size_t>(d);
}

}  // namespace apm
