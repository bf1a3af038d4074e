#pragma once

// Activation / acceptance probabilities on an arborescence, a Monte-Carlo
// cross-check, exact live-edge enumeration on small general graphs, and the
// non-submodularity counter-example.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "apm/arborescence.hpp"
#include "apm/error.hpp"
#include "apm/graph.hpp"

namespace apm {

// Invited nodes, by graph id. Never contains a friend of s.
using SelectionSet = std::vector<NodeId>;

// Per-tree-node mask; entry i is nonzero when tree node i is invited.
using SelectionMask = std::vector<char>;

struct ProbabilityReport {
  std::vector<double> ap;  // indexed by TreeIndex
  double objective = 0.0;  // ap at the root
};

inline SelectionMask to_mask(const Arborescence& tree, const SelectionSet& selected) {
  SelectionMask mask(tree.size(), 0);
  for (NodeId v : selected) {
    auto i = tree.find(v);
    if (!i) throw DomainError("selected node " + std::to_string(v) + " is not in the arborescence");
    if (tree.is_friend(*i)) throw DomainError("selected node " + std::to_string(v) + " is already a friend");
    mask[*i] = 1;
  }
  return mask;
}

inline SelectionSet to_selection(const Arborescence& tree, const SelectionMask& mask) {
  SelectionSet out;
  for (TreeIndex i = 0; i < tree.size(); ++i)
    if (mask[i]) out.push_back(tree.node(i).id);
  std::sort(out.begin(), out.end());
  return out;
}

namespace detail {

template <typename Included>
ProbabilityReport propagate(const Arborescence& tree, Included&& included) {
  ProbabilityReport rep;
  rep.ap.assign(tree.size(), 0.0);
  for (TreeIndex v : tree.topo_order()) {
    const auto& n = tree.node(v);
    if (n.in_friend_set) {
      rep.ap[v] = 1.0;
      continue;
    }
    if (!included(v) || n.children.empty()) continue;
    double fail = 1.0;
    for (TreeIndex c : n.children) fail *= 1.0 - rep.ap[c] * tree.node(c).weight;
    rep.ap[v] = 1.0 - fail;
  }
  rep.objective = rep.ap[tree.root()];
  return rep;
}

}  // namespace detail

// Every tree node invited.
inline ProbabilityReport activation_probability(const Arborescence& tree) {
  return detail::propagate(tree, [](TreeIndex) { return true; });
}

// Influence reaches v only through invited nodes and friends.
inline ProbabilityReport acceptance_probability(const Arborescence& tree, const SelectionMask& mask) {
  return detail::propagate(tree, [&](TreeIndex v) { return mask[v] != 0; });
}

inline ProbabilityReport acceptance_probability(const Arborescence& tree, const SelectionSet& selected) {
  return acceptance_probability(tree, to_mask(tree, selected));
}

// ---------------------------------------------------------------------------
// Monte-Carlo

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t accepted = 0;
};

// Each trial walks the tree bottom-up: friends accept, an invited node
// accepts when some accepted child's coin (bias = edge weight) lands, and
// uninvited nodes never accept. Trials are split over `workers` threads, each
// with a stream seeded from (seed, worker index).
inline McEstimate mc_estimate(const Arborescence& tree, const SelectionMask& mask, std::uint64_t trials,
                              std::uint64_t seed, unsigned workers = 1) {
  if (trials < 1) throw DomainError("Monte-Carlo needs at least one trial");
  workers = std::max(1u, workers);
  const auto& order = tree.topo_order();

  auto run = [&](std::uint64_t count, unsigned worker) {
    std::seed_seq sseq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), worker};
    std::mt19937_64 rng(sseq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<char> accepted(tree.size(), 0);
    std::uint64_t hits = 0;
    for (std::uint64_t trial = 0; trial < count; ++trial) {
      for (TreeIndex v : order) {
        const auto& n = tree.node(v);
        char ok = 0;
        if (n.in_friend_set) {
          ok = 1;
        } else if (mask[v]) {
          for (TreeIndex c : n.children)
            if (accepted[c] && unit(rng) < tree.node(c).weight) {
              ok = 1;
              break;
            }
        }
        accepted[v] = ok;
      }
      hits += accepted[tree.root()];
    }
    return hits;
  };

  std::vector<std::uint64_t> hits(workers, 0);
  if (workers == 1) {
    hits[0] = run(trials, 0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t share = trials / workers + (w < trials % workers ? 1 : 0);
      pool.emplace_back([&, w, share] { hits[w] = run(share, w); });
    }
    for (auto& th : pool) th.join();
  }

  McEstimate est;
  est.trials = trials;
  for (auto h : hits) est.accepted += h;
  est.estimate = static_cast<double>(est.accepted) / static_cast<double>(trials);
  est.std_error = std::sqrt(est.estimate * (1.0 - est.estimate) / static_cast<double>(trials));
  return est;
}

// ---------------------------------------------------------------------------
// General graphs

namespace detail {

struct InducedInstance {
  std::vector<Index> nodes;  // S members first, then R members
  std::vector<char> source;  // per local node: member of S
  struct Edge {
    std::size_t from, to;
    double w;
  };
  std::vector<Edge> edges;  // tail in S∪R, head in R, w > 0
  std::size_t target = 0;
  bool target_selected = false;
};

inline InducedInstance induce(const SocialGraph& g, const FriendSet& friends, const SelectionSet& selected,
                              NodeId target) {
  InducedInstance inst;
  if (friends.contains(target)) throw DomainError("target is already in the friend set");
  std::vector<std::size_t> local(g.node_count(), static_cast<std::size_t>(-1));
  for (NodeId f : friends.members()) {
    Index i = g.require(f);
    local[i] = inst.nodes.size();
    inst.nodes.push_back(i);
    inst.source.push_back(1);
  }
  for (NodeId r : selected) {
    Index i = g.require(r);
    if (friends.contains(r)) throw DomainError("selected node " + std::to_string(r) + " is already a friend");
    if (local[i] != static_cast<std::size_t>(-1)) continue;
    local[i] = inst.nodes.size();
    inst.nodes.push_back(i);
    inst.source.push_back(0);
  }
  const Index t = g.require(target);
  inst.target_selected = local[t] != static_cast<std::size_t>(-1);
  if (inst.target_selected) inst.target = local[t];
  for (std::size_t a = 0; a < inst.nodes.size(); ++a)
    for (const auto& arc : g.out_arcs(inst.nodes[a])) {
      const std::size_t b = local[arc.node];
      if (b == static_cast<std::size_t>(-1) || inst.source[b] || arc.weight <= 0.0) continue;
      inst.edges.push_back({a, b, arc.weight});
    }
  return inst;
}

}  // namespace detail

// Sums over every live/blocked outcome of the arcs that can carry influence
// inside S∪R; t accepts when a live path runs from S through invited nodes to t.
inline double exact_ic_acceptance(const SocialGraph& g, const FriendSet& friends, const SelectionSet& selected,
                                  NodeId target, std::size_t max_edges = 20) {
  const auto inst = detail::induce(g, friends, selected, target);
  if (!inst.target_selected) return 0.0;
  const std::size_t m = inst.edges.size();
  if (m > max_edges)
    throw DomainError("live-edge enumeration over " + std::to_string(m) + " edges exceeds the limit of " +
                      std::to_string(max_edges));

  std::vector<char> on(inst.nodes.size());
  double total = 0.0;
  for (std::uint64_t world = 0; world < (std::uint64_t{1} << m); ++world) {
    double p = 1.0;
    for (std::size_t e = 0; e < m; ++e) p *= (world >> e & 1) ? inst.edges[e].w : 1.0 - inst.edges[e].w;
    if (p == 0.0) continue;
    std::copy(inst.source.begin(), inst.source.end(), on.begin());
    for (bool grew = true; grew;) {
      grew = false;
      for (std::size_t e = 0; e < m; ++e)
        if ((world >> e & 1) && on[inst.edges[e].from] && !on[inst.edges[e].to]) {
          on[inst.edges[e].to] = 1;
          grew = true;
        }
    }
    if (on[inst.target]) total += p;
  }
  return total;
}

// Acceptance recursion applied directly to an acyclic graph: every in-neighbour
// in S∪R contributes an independent factor, even when two of them share an
// ancestor. Equal to exact_ic_acceptance on trees, an approximation otherwise.
inline double dag_acceptance(const SocialGraph& g, const FriendSet& friends, const SelectionSet& selected,
                             NodeId target) {
  const auto inst = detail::induce(g, friends, selected, target);
  if (!inst.target_selected) return 0.0;
  const std::size_t n = inst.nodes.size();
  std::vector<std::size_t> indeg(n, 0);
  std::vector<std::vector<std::size_t>> incoming(n);
  for (std::size_t e = 0; e < inst.edges.size(); ++e) {
    incoming[inst.edges[e].to].push_back(e);
    if (!inst.source[inst.edges[e].from]) ++indeg[inst.edges[e].to];
  }
  std::vector<std::size_t> order;
  for (std::size_t v = 0; v < n; ++v)
    if (!inst.source[v] && indeg[v] == 0) order.push_back(v);
  for (std::size_t head = 0; head < order.size(); ++head)
    for (const auto& e : inst.edges)
      if (e.from == order[head] && --indeg[e.to] == 0) order.push_back(e.to);

  std::size_t invited = 0;
  for (std::size_t v = 0; v < n; ++v) invited += inst.source[v] ? 0 : 1;
  if (order.size() != invited) throw DomainError("selected nodes induce a cycle; acceptance recursion needs a DAG");

  std::vector<double> ap(n, 0.0);
  for (std::size_t v = 0; v < n; ++v)
    if (inst.source[v]) ap[v] = 1.0;
  for (std::size_t v : order) {
    double fail = 1.0;
    for (std::size_t e : incoming[v]) fail *= 1.0 - ap[inst.edges[e].from] * inst.edges[e].w;
    ap[v] = 1.0 - fail;
  }
  return ap[inst.target];
}

// ---------------------------------------------------------------------------
// Non-submodularity

struct CounterexampleReport {
  // Ids used by the fixture graph.
  static constexpr NodeId kA = 1, kB = 2, kC = 3, kT = 4, kS = 0;

  double ap_small = 0.0;         // R_S = {t}
  double ap_small_plus = 0.0;    // R_S ∪ {c}
  double ap_large = 0.0;         // R_T = {b, t}
  double ap_large_plus = 0.0;    // R_T ∪ {c}
  double gain_small = 0.0;
  double gain_large = 0.0;
  // Same four sets under exact live-edge enumeration.
  double exact_small = 0.0, exact_small_plus = 0.0, exact_large = 0.0, exact_large_plus = 0.0;

  bool submodularity_violated() const { return gain_small < gain_large; }
};

// s -> a (1.0) makes a the only friend besides s; a->b .9, b->t .1, b->c 1, c->t 1.
inline SocialGraph counterexample_graph() {
  using R = CounterexampleReport;
  GraphBuilder b;
  b.add_edge(R::kS, R::kA, 1.0);
  b.add_edge(R::kA, R::kB, 0.9);
  b.add_edge(R::kB, R::kT, 0.1);
  b.add_edge(R::kB, R::kC, 1.0);
  b.add_edge(R::kC, R::kT, 1.0);
  return std::move(b).build();
}

inline CounterexampleReport submodularity_counterexample() {
  using R = CounterexampleReport;
  const SocialGraph g = counterexample_graph();
  const FriendSet friends(g, R::kS, {R::kA});
  const SelectionSet small{R::kT}, small_plus{R::kC, R::kT}, large{R::kB, R::kT}, large_plus{R::kB, R::kC, R::kT};

  R rep;
  rep.ap_small = dag_acceptance(g, friends, small, R::kT);
  rep.ap_small_plus = dag_acceptance(g, friends, small_plus, R::kT);
  rep.ap_large = dag_acceptance(g, friends, large, R::kT);
  rep.ap_large_plus = dag_acceptance(g, friends, large_plus, R::kT);
  rep.gain_small = rep.ap_small_plus - rep.ap_small;
  rep.gain_large = rep.ap_large_plus - rep.ap_large;
  rep.exact_small = exact_ic_acceptance(g, friends, small, R::kT);
  rep.exact_small_plus = exact_ic_acceptance(g, friends, small_plus, R::kT);
  rep.exact_large = exact_ic_acceptance(g, friends, large, R::kT);
  rep.exact_large_plus = exact_ic_acceptance(g, friends, large_plus, R::kT);
  return rep;
}

}  // namespace apm
