#pragma once

// Maximum influence paths and the (homophily-extended) maximum influence
// in-arborescence rooted at the friending target.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "apm/error.hpp"
#include "apm/graph.hpp"

namespace apm {

// Result of a single-target maximum-probability path search.
struct MaxInfluenceTree {
  Index target = kNoIndex;
  std::vector<Index> next_hop;    // kNoIndex for the target and unreachable nodes
  std::vector<double> cost;       // -log of the path product; inf when unreachable
  std::vector<double> path_prob;  // exp(-cost); may underflow to 0 on long paths

  bool reaches(Index v) const { return v == target || next_hop[v] != kNoIndex; }
};

// Dijkstra on the reverse graph with arc length -log w, so the tree holds
// maximum-product paths; w = 0 arcs are never used. Distances stay finite on
// paths whose product underflows a double. Ties within 1e-12 go to the
// smaller next-hop id so the union of per-node paths is a tree.
inline MaxInfluenceTree max_influence_tree(const SocialGraph& g, NodeId target) {
  constexpr double kTieTol = 1e-12;
  const Index t = g.require(target);
  const std::size_t n = g.node_count();

  MaxInfluenceTree out;
  out.target = t;
  out.next_hop.assign(n, kNoIndex);
  out.cost.assign(n, std::numeric_limits<double>::infinity());
  out.cost[t] = 0.0;

  using Entry = std::pair<double, Index>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  std::vector<char> settled(n, 0);
  heap.push({0.0, t});

  while (!heap.empty()) {
    const Index u = heap.top().second;
    heap.pop();
    if (settled[u]) continue;
    settled[u] = 1;
    for (const auto& arc : g.in_arcs(u)) {
      const Index v = arc.node;
      if (settled[v] || arc.weight <= 0.0) continue;
      const double cand = out.cost[u] - std::log(arc.weight);
      double& cv = out.cost[v];
      Index& nh = out.next_hop[v];
      const bool better = cand < cv - kTieTol;
      const bool tie = !better && std::abs(cand - cv) <= kTieTol && u < nh;
      if (better || tie) {
        cv = cand;
        nh = u;
        heap.push({cand, v});
      }
    }
  }

  out.path_prob.assign(n, 0.0);
  for (Index v = 0; v < n; ++v)
    if (out.reaches(v)) out.path_prob[v] = std::exp(-out.cost[v]);
  return out;
}

using TreeIndex = std::size_t;
inline constexpr TreeIndex kNoParent = static_cast<TreeIndex>(-1);

// MIIA(t, theta) with homophily leaves. Index 0 is the root t. Every leaf is
// a friend of s or an s-copy carrying the homophily edge into its parent.
class Arborescence {
 public:
  struct Node {
    NodeId id = 0;  // graph id; for an s-copy, the id of the node it is attached to
    bool s_copy = false;
    bool in_friend_set = false;  // member of S, or an s-copy
    TreeIndex parent = kNoParent;
    double weight = 0.0;  // w_{v,parent}
    std::vector<TreeIndex> children;
    std::size_t z = 0;      // non-friend nodes in the subtree, v included
    std::size_t depth = 0;  // hops to the root
  };

  Arborescence() = default;

  std::size_t size() const noexcept { return nodes_.size(); }
  TreeIndex root() const noexcept { return 0; }
  const Node& node(TreeIndex i) const { return nodes_.at(i); }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }

  // Children before parents; root last.
  const std::vector<TreeIndex>& topo_order() const noexcept { return topo_; }

  NodeId initiator() const noexcept { return initiator_; }
  NodeId target() const noexcept { return nodes_.front().id; }
  double theta() const noexcept { return theta_; }

  bool is_friend(TreeIndex i) const { return nodes_[i].in_friend_set; }
  std::size_t in_degree(TreeIndex i) const { return nodes_[i].children.size(); }
  std::size_t non_friend_count() const { return nodes_.front().z; }

  // Tree position of a graph node (s-copies are not addressable).
  std::optional<TreeIndex> find(NodeId id) const {
    auto it = std::lower_bound(by_id_.begin(), by_id_.end(), id,
                               [&](TreeIndex a, NodeId x) { return nodes_[a].id < x; });
    if (it == by_id_.end() || nodes_[*it].id != id) return std::nullopt;
    return *it;
  }

  std::string label(TreeIndex i) const {
    const Node& n = nodes_[i];
    return n.s_copy ? "s@" + std::to_string(n.id) : std::to_string(n.id);
  }

  std::vector<TreeIndex> friend_leaves() const {
    std::vector<TreeIndex> out;
    for (TreeIndex i = 0; i < size(); ++i)
      if (nodes_[i].in_friend_set && nodes_[i].children.empty()) out.push_back(i);
    return out;
  }

 private:
  friend class ArborescenceBuilder;

  std::vector<Node> nodes_;
  std::vector<TreeIndex> topo_;
  std::vector<TreeIndex> by_id_;  // graph nodes sorted by id
  NodeId initiator_ = 0;
  double theta_ = 0.0;
};

// Assembles an Arborescence from parent links. Used by build_miia and by
// tests that need hand-made trees.
class ArborescenceBuilder {
 public:
  ArborescenceBuilder(NodeId root, NodeId initiator, double theta = 0.0) {
    tree_.initiator_ = initiator;
    tree_.theta_ = theta;
    Arborescence::Node r;
    r.id = root;
    tree_.nodes_.push_back(r);
  }

  TreeIndex add(NodeId id, bool in_friend_set, TreeIndex parent, double weight) {
    return push(id, false, in_friend_set, parent, weight);
  }

  TreeIndex add_s_copy(TreeIndex parent, double homophily) {
    return push(tree_.nodes_.at(parent).id, true, true, parent, homophily);
  }

  // Reorders into BFS order (children by id, s-copies last) and fills z,
  // depth, topo order.
  Arborescence finish() && {
    auto& src = tree_.nodes_;
    for (auto& n : src)
      std::sort(n.children.begin(), n.children.end(), [&](TreeIndex a, TreeIndex b) {
        if (src[a].s_copy != src[b].s_copy) return !src[a].s_copy;
        return src[a].id < src[b].id;
      });

    std::vector<TreeIndex> order{0};
    for (std::size_t head = 0; head < order.size(); ++head)
      for (TreeIndex c : src[order[head]].children) order.push_back(c);
    if (order.size() != src.size()) throw DomainError("arborescence has nodes detached from the root");

    std::vector<TreeIndex> remap(src.size());
    for (std::size_t i = 0; i < order.size(); ++i) remap[order[i]] = i;
    std::vector<Arborescence::Node> nodes(src.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      Arborescence::Node n = std::move(src[order[i]]);
      if (n.parent != kNoParent) n.parent = remap[n.parent];
      for (auto& c : n.children) c = remap[c];
      nodes[i] = std::move(n);
    }
    for (std::size_t i = 1; i < nodes.size(); ++i) nodes[i].depth = nodes[nodes[i].parent].depth + 1;
    for (std::size_t i = nodes.size(); i-- > 0;) {
      auto& n = nodes[i];
      n.z = n.in_friend_set ? 0 : 1;
      for (TreeIndex c : n.children) n.z += nodes[c].z;
    }

    tree_.nodes_ = std::move(nodes);
    tree_.topo_.resize(tree_.nodes_.size());
    for (std::size_t i = 0; i < tree_.topo_.size(); ++i) tree_.topo_[i] = tree_.topo_.size() - 1 - i;
    for (TreeIndex i = 0; i < tree_.nodes_.size(); ++i)
      if (!tree_.nodes_[i].s_copy) tree_.by_id_.push_back(i);
    std::sort(tree_.by_id_.begin(), tree_.by_id_.end(),
              [&](TreeIndex a, TreeIndex b) { return tree_.nodes_[a].id < tree_.nodes_[b].id; });
    for (std::size_t i = 1; i < tree_.by_id_.size(); ++i)
      if (tree_.nodes_[tree_.by_id_[i]].id == tree_.nodes_[tree_.by_id_[i - 1]].id)
        throw DomainError("node " + std::to_string(tree_.nodes_[tree_.by_id_[i]].id) + " appears twice");
    return std::move(tree_);
  }

 private:
  TreeIndex push(NodeId id, bool s_copy, bool in_friend_set, TreeIndex parent, double weight) {
    auto& nodes = tree_.nodes_;
    if (parent >= nodes.size()) throw DomainError("unknown parent in arborescence");
    if (nodes[parent].in_friend_set) throw DomainError("friend node " + std::to_string(nodes[parent].id) + " cannot have children");
    if (!(weight >= 0.0 && weight <= 1.0)) throw DomainError("arborescence weight out of [0,1]");
    Arborescence::Node n;
    n.id = id;
    n.s_copy = s_copy;
    n.in_friend_set = in_friend_set;
    n.parent = parent;
    n.weight = weight;
    nodes.push_back(std::move(n));
    nodes[parent].children.push_back(nodes.size() - 1);
    return nodes.size() - 1;
  }

  Arborescence tree_;
};

// Union of the maximum influence paths from every friend of s to t, keeping
// paths of probability >= theta, then one s-copy leaf under each non-friend
// node v with weight h_{s,v} > 0. A friend sitting on another friend's path
// cuts that path, so friends are always leaves.
inline Arborescence build_miia(const SocialGraph& g, const FriendSet& friends, NodeId target, double theta = 0.0,
                               const std::optional<HomophilyModel>& homophily = std::nullopt) {
  if (friends.contains(target))
    throw DomainError("target " + std::to_string(target) + " is already in the friend set");
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("theta must be in [0,1]");

  const MaxInfluenceTree mip = max_influence_tree(g, target);
  const std::size_t n = g.node_count();
  std::vector<char> is_friend(n, 0);
  for (NodeId f : friends.members()) is_friend[g.require(f)] = 1;

  // A friend is a leaf when no other friend lies between it and t.
  std::vector<char> included(n, 0);
  included[mip.target] = 1;
  for (NodeId f : friends.members()) {
    const Index fi = g.require(f);
    if (!mip.reaches(fi) || mip.path_prob[fi] < theta) continue;
    bool shadowed = false;
    for (Index v = mip.next_hop[fi]; v != mip.target; v = mip.next_hop[v])
      if (is_friend[v]) {
        shadowed = true;
        break;
      }
    if (shadowed) continue;
    for (Index v = fi; v != mip.target && !included[v]; v = mip.next_hop[v]) included[v] = 1;
  }

  ArborescenceBuilder b(target, friends.initiator(), theta);
  std::vector<TreeIndex> pos(n, kNoParent);
  pos[mip.target] = 0;
  // Attach along paths; a node's next hop may have a larger index, so walk to
  // the nearest placed ancestor first.
  std::vector<Index> chain;
  for (Index v = 0; v < n; ++v) {
    if (!included[v] || pos[v] != kNoParent) continue;
    chain.clear();
    for (Index u = v; pos[u] == kNoParent; u = mip.next_hop[u]) chain.push_back(u);
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      const Index u = *it;
      const Index up = mip.next_hop[u];
      pos[u] = b.add(g.id_of(u), is_friend[u] != 0, pos[up], *g.arc_weight(u, up));
    }
  }

  if (homophily) {
    for (Index v = 0; v < n; ++v) {
      if (!included[v] || is_friend[v]) continue;
      const double h = homophily->at(g.id_of(v));
      if (h > 0.0) b.add_s_copy(pos[v], h);
    }
  }

  Arborescence tree = std::move(b).finish();
  if (tree.in_degree(tree.root()) == 0)
    throw DomainError("target " + std::to_string(target) + " is unreachable from the friend set of " +
                      std::to_string(friends.initiator()) + " and has no homophily channel");
  return tree;
}

// z_v recomputed from scratch for an arbitrary friend set.
inline std::vector<std::size_t> subtree_counts(const Arborescence& tree, const FriendSet& friends) {
  std::vector<std::size_t> z(tree.size(), 0);
  for (TreeIndex v : tree.topo_order()) {
    const auto& n = tree.node(v);
    z[v] = (n.s_copy || friends.contains(n.id)) ? 0 : 1;
    for (TreeIndex c : n.children) z[v] += z[c];
  }
  return z;
}

// "v parent w_vparent z_v" per node, root as "t ROOT - z_t", in BFS order.
inline void dump_arborescence(std::ostream& out, const Arborescence& tree) {
  std::ostringstream buf;
  buf << std::setprecision(10);
  for (TreeIndex i = 0; i < tree.size(); ++i) {
    const auto& n = tree.node(i);
    if (n.parent == kNoParent)
      buf << tree.label(i) << " ROOT - " << n.z << '\n';
    else
      buf << tree.label(i) << ' ' << tree.label(n.parent) << ' ' << n.weight << ' ' << n.z << '\n';
  }
  out << buf.str();
}

}  // namespace apm
