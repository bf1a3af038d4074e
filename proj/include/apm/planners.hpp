#pragma once

// Invitation planners over the arborescence: the range-based greedy
// baseline, the exhaustive tree DP (SITA) and the in-node aggregated tree DP
// (SITINA), plus backtracking from DP choices to the invitation set.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "apm/acceptance.hpp"
#include "apm/arborescence.hpp"
#include "apm/error.hpp"
#include "apm/graph.hpp"

namespace apm {

enum class Algorithm { kRangeGreedy, kSita, kSitina };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kRangeGreedy: return "rg";
    case Algorithm::kSita: return "sita";
    case Algorithm::kSitina: return "sitina";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view name) {
  if (name == "rg") return Algorithm::kRangeGreedy;
  if (name == "sita") return Algorithm::kSita;
  if (name == "sitina") return Algorithm::kSitina;
  throw DomainError("unknown algorithm '" + std::string(name) + "'");
}

struct PlanRequest {
  FriendSet friends;  // includes the initiator
  NodeId target = 0;
  std::size_t budget = 1;
  double theta = 0.0;

  NodeId source() const { return friends.initiator(); }
};

struct PlanEntry {
  NodeId node = 0;
  std::size_t subtree_budget = 0;  // invited nodes in this node's subtree, itself included
  double ap = 0.0;
  std::size_t depth = 0;  // hops to t
};

struct InvitationPlan {
  Algorithm algorithm = Algorithm::kSitina;
  std::size_t budget = 0;
  SelectionSet selected;           // sorted ids
  std::vector<PlanEntry> entries;  // same order as `selected`
  double objective = 0.0;
  std::size_t longest_path = 0;  // max hops from an invited node to t
  bool already_friends = false;
};

// Packs a selection into a plan; the objective is always re-evaluated with
// the acceptance recursion.
inline InvitationPlan make_plan(const Arborescence& tree, const SelectionMask& mask, Algorithm algo,
                                std::size_t budget) {
  InvitationPlan plan;
  plan.algorithm = algo;
  plan.budget = budget;
  const ProbabilityReport rep = acceptance_probability(tree, mask);
  plan.objective = rep.objective;

  std::vector<std::size_t> below(tree.size(), 0);
  for (TreeIndex v : tree.topo_order()) {
    below[v] = mask[v] ? 1 : 0;
    for (TreeIndex c : tree.node(v).children) below[v] += below[c];
  }
  std::vector<TreeIndex> picked;
  for (TreeIndex v = 0; v < tree.size(); ++v)
    if (mask[v]) picked.push_back(v);
  std::sort(picked.begin(), picked.end(),
            [&](TreeIndex a, TreeIndex b) { return tree.node(a).id < tree.node(b).id; });
  for (TreeIndex v : picked) {
    plan.selected.push_back(tree.node(v).id);
    plan.entries.push_back({tree.node(v).id, below[v], rep.ap[v], tree.node(v).depth});
    plan.longest_path = std::max(plan.longest_path, tree.node(v).depth);
  }
  return plan;
}

inline void check_budget(std::size_t budget) {
  if (budget < 1) throw DomainError("invitation budget must be at least 1");
}

// ---------------------------------------------------------------------------
// Range-based greedy

// Repeatedly invites the node with the highest acceptance probability among
// non-friends that already have a friend or an invitee among their tree
// in-neighbours, restricted to nodes at most budget - |R| - 1 hops from t.
// Ties go to the smaller id. When nothing qualifies, t is invited and the
// search ends.
inline InvitationPlan plan_rg(const Arborescence& tree, std::size_t budget) {
  check_budget(budget);
  if (tree.size() == 0) throw DomainError("empty arborescence");
  SelectionMask mask(tree.size(), 0);
  std::size_t used = 0;
  while (used < budget) {
    const ProbabilityReport rep = acceptance_probability(tree, mask);
    const std::size_t reach = budget - used - 1;
    std::optional<TreeIndex> best;
    double best_score = -1.0;
    for (TreeIndex v = 0; v < tree.size(); ++v) {
      const auto& n = tree.node(v);
      if (n.in_friend_set || mask[v] || n.depth > reach) continue;
      bool fed = false;
      double fail = 1.0;
      for (TreeIndex c : n.children) {
        if (!tree.is_friend(c) && !mask[c]) continue;
        fed = true;
        fail *= 1.0 - rep.ap[c] * tree.node(c).weight;
      }
      if (!fed) continue;
      const double score = 1.0 - fail;
      if (score > best_score || (score == best_score && n.id < tree.node(*best).id)) {
        best = v;
        best_score = score;
      }
    }
    if (!best) {
      if (!mask[tree.root()]) {
        mask[tree.root()] = 1;
        ++used;
      }
      break;
    }
    mask[*best] = 1;
    ++used;
  }
  return make_plan(tree, mask, Algorithm::kRangeGreedy, budget);
}

// ---------------------------------------------------------------------------
// DP tables

// f(v, r): best acceptance at v with r invitations inside v's subtree, v
// itself included, r in [0, min(z_v, budget)].
// m(v, k, x): best acceptance at v from at most x invitations spread over the
// subtrees of its first k children, x in [0, min(z_v, budget) - 1].
// choice(v, k, x): invitations given to child k in that optimum.
class DpTables {
 public:
  DpTables() = default;

  std::size_t budget() const noexcept { return budget_; }
  std::size_t node_count() const noexcept { return f_begin_.empty() ? 0 : f_begin_.size() - 1; }

  std::size_t f_cap(TreeIndex v) const { return f_begin_[v + 1] - f_begin_[v] - 1; }
  double f(TreeIndex v, std::size_t r) const {
    assert(r <= f_cap(v));
    return f_[f_begin_[v] + r];
  }

  bool has_rows() const noexcept { return !m_.empty() || !row_off_.empty(); }
  std::size_t row_count(TreeIndex v) const { return row_begin_[v + 1] - row_begin_[v]; }
  // k is 1-based, as in the child numbering u_1..u_d.
  std::size_t m_cap(TreeIndex v, std::size_t k) const {
    const std::size_t row = row_begin_[v] + k - 1;
    return row_off_[row + 1] - row_off_[row] - 1;
  }
  double m(TreeIndex v, std::size_t k, std::size_t x) const {
    if (k == 0) return 0.0;
    assert(x <= m_cap(v, k));
    return m_[row_off_[row_begin_[v] + k - 1] + x];
  }
  std::size_t choice(TreeIndex v, std::size_t k, std::size_t x) const {
    assert(k >= 1 && x <= m_cap(v, k));
    return static_cast<std::size_t>(choice_[row_off_[row_begin_[v] + k - 1] + x]);
  }

  // Exhaustive-DP allocations: child budgets for (v, r), or empty.
  const std::vector<std::uint32_t>& allocation(TreeIndex v, std::size_t r) const {
    return allocation_[f_begin_[v] + r];
  }
  bool has_allocations() const noexcept { return !allocation_.empty(); }

 private:
  friend DpTables sitina_tables(const Arborescence&, std::size_t);
  friend DpTables sita_tables(const Arborescence&, std::size_t, double);

  void init_f(const Arborescence& tree, std::size_t budget) {
    budget_ = budget;
    f_begin_.assign(tree.size() + 1, 0);
    for (TreeIndex v = 0; v < tree.size(); ++v)
      f_begin_[v + 1] = f_begin_[v] + std::min(tree.node(v).z, budget) + 1;
    f_.assign(f_begin_.back(), 0.0);
  }

  std::size_t budget_ = 0;
  std::vector<std::size_t> f_begin_;
  std::vector<double> f_;
  std::vector<std::size_t> row_begin_;
  std::vector<std::size_t> row_off_;
  std::vector<double> m_;
  std::vector<std::int32_t> choice_;
  std::vector<std::vector<std::uint32_t>> allocation_;
};

// ---------------------------------------------------------------------------
// SITINA

// Children are folded in one at a time, so each node costs
// O(d_v * budget^2) and the whole tree O(n * budget^2). Every row of v spans
// x in [0, min(z_v, budget) - 1] and the empty prefix is 0 for every x, so
// m(v, k, x) is the best over at most x invitations. Acceptance is monotone
// in the invitation set, so this matches the exact-count optimum wherever
// that is defined. Argmax ties keep the smaller share for the later child.
inline DpTables sitina_tables(const Arborescence& tree, std::size_t budget) {
  check_budget(budget);
  DpTables t;
  t.init_f(tree, budget);
  const std::size_t n = tree.size();

  t.row_begin_.assign(n + 1, 0);
  for (TreeIndex v = 0; v < n; ++v) t.row_begin_[v + 1] = t.row_begin_[v] + tree.in_degree(v);
  t.row_off_.assign(t.row_begin_.back() + 1, 0);
  for (TreeIndex v = 0; v < n; ++v) {
    const std::size_t width = t.f_cap(v);  // x = 0 .. f_cap(v) - 1
    for (std::size_t k = 0; k < tree.in_degree(v); ++k) {
      const std::size_t row = t.row_begin_[v] + k;
      t.row_off_[row + 1] = t.row_off_[row] + width;
    }
  }
  t.m_.assign(t.row_off_.back(), 0.0);
  t.choice_.assign(t.row_off_.back(), 0);

  for (TreeIndex v : tree.topo_order()) {
    const auto& node = tree.node(v);
    double* fv = &t.f_[t.f_begin_[v]];
    if (node.in_friend_set) {
      fv[0] = 1.0;
      continue;
    }
    fv[0] = 0.0;
    const auto& kids = node.children;
    const double* prev = nullptr;  // m(v, 0, x) = 0
    for (std::size_t k = 0; k < kids.size(); ++k) {
      const TreeIndex u = kids[k];
      const double w = tree.node(u).weight;
      const double* fu = &t.f_[t.f_begin_[u]];
      const std::size_t fu_cap = t.f_cap(u);
      const std::size_t row = t.row_begin_[v] + k;
      double* cur = &t.m_[t.row_off_[row]];
      std::int32_t* pick = &t.choice_[t.row_off_[row]];
      const std::size_t cap = t.row_off_[row + 1] - t.row_off_[row] - 1;
      for (std::size_t x = 0; x <= cap; ++x) {
        const std::size_t hi = std::min(fu_cap, x);
        double best = -1.0;
        std::size_t arg = 0;
        for (std::size_t xp = 0; xp <= hi; ++xp) {
          const double before = prev ? prev[x - xp] : 0.0;
          const double val = 1.0 - (1.0 - before) * (1.0 - fu[xp] * w);
          if (val > best) {
            best = val;
            arg = xp;
          }
        }
        cur[x] = best;
        pick[x] = static_cast<std::int32_t>(arg);
      }
      prev = cur;
    }
    const std::size_t cap_v = t.f_cap(v);
    for (std::size_t r = 1; r <= cap_v; ++r) fv[r] = prev ? prev[r - 1] : 0.0;
  }
  return t;
}

// ---------------------------------------------------------------------------
// SITA

inline constexpr double kSitaStateLimit = 1e7;

// Splits the exhaustive DP will try, summed over nodes; saturates.
inline double sita_state_count(const Arborescence& tree, std::size_t budget) {
  // Splits tried at v: product over children of (min(z_u, budget) + 1).
  double total = 0.0;
  for (TreeIndex v = 0; v < tree.size(); ++v) {
    double splits = 1.0;
    for (TreeIndex u : tree.node(v).children)
      splits *= static_cast<double>(std::min(tree.node(u).z, budget)) + 1.0;
    total += splits;
    if (total > 1e300) return total;
  }
  return total;
}

// Tries every split (r_1..r_d) of r - 1 invitations over the children.
// Exponential in the in-degree; refuses trees above `state_limit`.
inline DpTables sita_tables(const Arborescence& tree, std::size_t budget, double state_limit = kSitaStateLimit) {
  check_budget(budget);
  const double states = sita_state_count(tree, budget);
  if (states > state_limit) {
    std::ostringstream msg;
    msg << "SITA enumeration guard: " << states << " allocation states exceed the limit of " << state_limit
        << "; use sitina";
    throw DomainError(msg.str());
  }

  DpTables t;
  t.init_f(tree, budget);
  t.row_begin_.assign(tree.size() + 1, 0);
  t.allocation_.assign(t.f_.size(), {});

  std::vector<std::uint32_t> split, best_split;
  for (TreeIndex v : tree.topo_order()) {
    const auto& node = tree.node(v);
    double* fv = &t.f_[t.f_begin_[v]];
    if (node.in_friend_set) {
      fv[0] = 1.0;
      continue;
    }
    const auto& kids = node.children;
    std::vector<std::size_t> suffix_cap(kids.size() + 1, 0);
    for (std::size_t k = kids.size(); k-- > 0;) suffix_cap[k] = suffix_cap[k + 1] + t.f_cap(kids[k]);

    for (std::size_t r = 1; r <= t.f_cap(v); ++r) {
      double best = -1.0;
      split.assign(kids.size(), 0);
      best_split.assign(kids.size(), 0);
      auto enumerate = [&](auto&& self, std::size_t k, std::size_t left, double fail) -> void {
        if (k == kids.size()) {
          if (left == 0 && 1.0 - fail > best) {
            best = 1.0 - fail;
            best_split = split;
          }
          return;
        }
        if (left > suffix_cap[k]) return;
        const TreeIndex u = kids[k];
        const double w = tree.node(u).weight;
        for (std::size_t ri = 0; ri <= std::min(left, t.f_cap(u)); ++ri) {
          split[k] = static_cast<std::uint32_t>(ri);
          self(self, k + 1, left - ri, fail * (1.0 - t.f(u, ri) * w));
        }
        split[k] = 0;
      };
      enumerate(enumerate, 0, r - 1, 1.0);
      fv[r] = best < 0.0 ? 0.0 : best;
      t.allocation_[t.f_begin_[v] + r] = best_split;
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Backtracking

// Walks the recorded choices from (t, min(z_t, budget)) down to the leaves.
inline SelectionMask backtrack(const DpTables& tables, const Arborescence& tree) {
  if (tables.node_count() != tree.size()) throw DomainError("DP tables do not match the arborescence");
  SelectionMask mask(tree.size(), 0);
  std::vector<std::pair<TreeIndex, std::size_t>> stack{{tree.root(), tables.f_cap(tree.root())}};
  while (!stack.empty()) {
    auto [v, r] = stack.back();
    stack.pop_back();
    if (r == 0 || tree.is_friend(v)) continue;
    mask[v] = 1;
    const auto& kids = tree.node(v).children;
    if (tables.has_allocations()) {
      const auto& split = tables.allocation(v, r);
      assert(split.size() == kids.size());
      for (std::size_t k = 0; k < kids.size(); ++k)
        if (split[k] > 0) stack.emplace_back(kids[k], split[k]);
      continue;
    }
    std::size_t x = r - 1;
    for (std::size_t k = kids.size(); k >= 1; --k) {
      const std::size_t share = tables.choice(v, k, x);
      assert(share <= x);
      if (share > 0) stack.emplace_back(kids[k - 1], share);
      x -= share;
    }
    assert(x == 0);
  }
  return mask;
}

inline double dp_objective(const DpTables& tables, const Arborescence& tree) {
  return tables.f(tree.root(), tables.f_cap(tree.root()));
}

inline InvitationPlan plan_sitina(const Arborescence& tree, std::size_t budget) {
  const DpTables tables = sitina_tables(tree, budget);
  return make_plan(tree, backtrack(tables, tree), Algorithm::kSitina, budget);
}

inline InvitationPlan plan_sita(const Arborescence& tree, std::size_t budget,
                                double state_limit = kSitaStateLimit) {
  const DpTables tables = sita_tables(tree, budget, state_limit);
  return make_plan(tree, backtrack(tables, tree), Algorithm::kSita, budget);
}

inline InvitationPlan plan_on_tree(const Arborescence& tree, std::size_t budget, Algorithm algo) {
  switch (algo) {
    case Algorithm::kRangeGreedy: return plan_rg(tree, budget);
    case Algorithm::kSita: return plan_sita(tree, budget);
    case Algorithm::kSitina: return plan_sitina(tree, budget);
  }
  throw DomainError("unknown algorithm");
}

inline Arborescence build_miia(const SocialGraph& g, const PlanRequest& req,
                               const std::optional<HomophilyModel>& homophily = std::nullopt) {
  return build_miia(g, req.friends, req.target, req.theta, homophily);
}

// Full request: a target that is already a friend gets an empty plan with
// objective 1 and no tree is built.
inline InvitationPlan plan(const SocialGraph& g, const PlanRequest& req, Algorithm algo,
                           const std::optional<HomophilyModel>& homophily = std::nullopt) {
  check_budget(req.budget);
  g.require(req.target);
  if (req.friends.contains(req.target)) {
    InvitationPlan p;
    p.algorithm = algo;
    p.budget = req.budget;
    p.objective = 1.0;
    p.already_friends = true;
    return p;
  }
  return plan_on_tree(build_miia(g, req, homophily), req.budget, algo);
}

}  // namespace apm
