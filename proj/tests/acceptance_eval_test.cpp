#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "apm/acceptance.hpp"
#include "oracles.hpp"

namespace apm {
namespace {

constexpr double kTol = 1e-12;

SocialGraph parse(const std::string& text) {
  std::istringstream in(text);
  return load_edge_list(in);
}

// s=0, a=1 (friend), b=2, t=3.
struct Chain {
  SocialGraph g = parse("0 1 1.0\n1 2 0.9\n2 3 0.1\n");
  FriendSet s{g, 0, {1}};
  Arborescence tree = build_miia(g, s, 3);
};

TEST(Activation, FriendLeafIsOne) {
  Chain c;
  const auto rep = activation_probability(c.tree);
  EXPECT_EQ(rep.ap[*c.tree.find(1)], 1.0);
  EXPECT_NEAR(rep.objective, 0.09, kTol);
}

TEST(Activation, WorkedExampleNodes) {
  // u4 <- friend u5 (0.75); u6 <- friend u7 (0.8), u8 (0.7) <- friend (0.95).
  const SocialGraph g = parse("5 4 0.75\n4 100 1\n7 6 0.8\n8 6 0.7\n9 8 0.95\n6 100 1\n0 5 1\n");
  const Arborescence tree = build_miia(g, FriendSet(g, 0, {5, 7, 9}), 100);
  const auto rep = activation_probability(tree);
  EXPECT_NEAR(rep.ap[*tree.find(4)], 0.75, kTol);
  EXPECT_NEAR(rep.ap[*tree.find(8)], 0.95, kTol);
  EXPECT_NEAR(rep.ap[*tree.find(6)], 0.933, kTol);
}

TEST(Acceptance, EmptySelectionIsZero) {
  Chain c;
  EXPECT_EQ(acceptance_probability(c.tree, SelectionSet{}).objective, 0.0);
}

TEST(Acceptance, ChainNeedsTheIntermediate) {
  Chain c;
  EXPECT_NEAR(acceptance_probability(c.tree, SelectionSet{2, 3}).objective, 0.09, kTol);
  EXPECT_EQ(acceptance_probability(c.tree, SelectionSet{3}).objective, 0.0);
  EXPECT_EQ(acceptance_probability(c.tree, SelectionSet{2}).objective, 0.0);
}

TEST(Acceptance, RejectsInvalidSelections) {
  Chain c;
  EXPECT_THROW(acceptance_probability(c.tree, SelectionSet{1}), DomainError);   // friend
  EXPECT_THROW(acceptance_probability(c.tree, SelectionSet{42}), DomainError);  // not in tree
}

TEST(Acceptance, ReportInvariants) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    testing::TreeShape shape;
    shape.non_friend = 1 + rng() % 15;
    const auto inst = testing::random_tree_instance(rng, shape);
    const Arborescence tree = inst.tree();
    SelectionMask mask(tree.size(), 0);
    for (TreeIndex v = 0; v < tree.size(); ++v)
      if (!tree.is_friend(v)) mask[v] = rng() % 2;
    const auto rep = acceptance_probability(tree, mask);
    for (TreeIndex v = 0; v < tree.size(); ++v) {
      ASSERT_GE(rep.ap[v], 0.0);
      ASSERT_LE(rep.ap[v], 1.0);
      if (tree.is_friend(v)) {
        ASSERT_EQ(rep.ap[v], 1.0);
      } else if (!mask[v]) {
        ASSERT_EQ(rep.ap[v], 0.0);
      }
    }
  }
}

// Property: adding invitees never lowers acceptance at t.
TEST(Acceptance, MonotoneInSelection) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    testing::TreeShape shape;
    shape.non_friend = 1 + rng() % 20;
    const auto inst = testing::random_tree_instance(rng, shape);
    const Arborescence tree = inst.tree();
    SelectionMask small(tree.size(), 0), large(tree.size(), 0);
    for (TreeIndex v = 0; v < tree.size(); ++v) {
      if (tree.is_friend(v)) continue;
      small[v] = rng() % 3 == 0;
      large[v] = small[v] || rng() % 2;
    }
    ASSERT_LE(acceptance_probability(tree, small).objective, acceptance_probability(tree, large).objective + kTol);
  }
}

TEST(MonteCarlo, DeterministicCoin) {
  const SocialGraph g = parse("0 1 1.0\n");
  const Arborescence tree = build_miia(g, FriendSet(g, 0, {}), 1);
  const auto est = mc_estimate(tree, to_mask(tree, {1}), 1000, 9);
  EXPECT_EQ(est.estimate, 1.0);
  EXPECT_EQ(est.std_error, 0.0);
}

TEST(MonteCarlo, EmptySelectionNeverAccepts) {
  Chain c;
  EXPECT_EQ(mc_estimate(c.tree, SelectionMask(c.tree.size(), 0), 5000, 1).estimate, 0.0);
  EXPECT_THROW(mc_estimate(c.tree, SelectionMask(c.tree.size(), 0), 0, 1), DomainError);
}

TEST(MonteCarlo, ChainAgreesWithinThreeStandardErrors) {
  Chain c;
  const auto est = mc_estimate(c.tree, to_mask(c.tree, {2, 3}), 100000, 12345);
  const double se = std::sqrt(0.09 * 0.91 / 1e5);
  EXPECT_LE(std::abs(est.estimate - 0.09), 3 * se);
}

TEST(MonteCarlo, SeededRunsRepeatAndWorkersCombine) {
  Chain c;
  const auto mask = to_mask(c.tree, {2, 3});
  EXPECT_EQ(mc_estimate(c.tree, mask, 20000, 77).accepted, mc_estimate(c.tree, mask, 20000, 77).accepted);
  const auto par = mc_estimate(c.tree, mask, 40000, 77, 4);
  EXPECT_EQ(par.accepted, mc_estimate(c.tree, mask, 40000, 77, 4).accepted);
  EXPECT_EQ(par.trials, 40000u);
  EXPECT_LE(std::abs(par.estimate - 0.09), 4 * std::sqrt(0.09 * 0.91 / 4e4));
}

TEST(ExactEnumeration, SingleEdge) {
  const SocialGraph g = parse("0 1 0.5\n");
  EXPECT_NEAR(exact_ic_acceptance(g, FriendSet(g, 0, {}), {1}, 1), 0.5, kTol);
  EXPECT_EQ(exact_ic_acceptance(g, FriendSet(g, 0, {}), {}, 1), 0.0);
}

TEST(ExactEnumeration, GuardRejectsLargeInstances) {
  GraphBuilder b;
  for (NodeId v = 1; v <= 21; ++v) b.add_edge(0, v, 0.5);
  for (NodeId v = 1; v <= 21; ++v) b.add_edge(v, 100, 0.5);
  const SocialGraph g = std::move(b).build();
  SelectionSet all;
  for (NodeId v = 1; v <= 21; ++v) all.push_back(v);
  all.push_back(100);
  EXPECT_THROW(exact_ic_acceptance(g, FriendSet(g, 0, {}), all, 100), DomainError);
}

// Property: independence is exact on trees, so enumeration matches the
// bottom-up recursion.
TEST(ExactEnumeration, EqualsRecursionOnTrees) {
  std::mt19937_64 rng(21);
  int checked = 0;
  while (checked < 40) {
    testing::TreeShape shape;
    shape.non_friend = 1 + rng() % 8;
    shape.max_friend_leaves = 1;
    shape.homophily_prob = 0.0;
    const auto inst = testing::random_tree_instance(rng, shape);
    if (inst.graph.edge_count() > 20) continue;
    const Arborescence tree = inst.tree();
    SelectionSet sel;
    for (NodeId v = 0; v < inst.non_friend; ++v)
      if (v == 0 || rng() % 4 != 0) sel.push_back(v);
    const double exact = exact_ic_acceptance(inst.graph, inst.friend_set(), sel, inst.target);
    ASSERT_NEAR(exact, acceptance_probability(tree, sel).objective, kTol);
    ASSERT_NEAR(exact, dag_acceptance(inst.graph, inst.friend_set(), sel, inst.target), kTol);
    ++checked;
  }
}

TEST(Counterexample, ReproducesAllFourProbabilities) {
  const auto r = submodularity_counterexample();
  EXPECT_NEAR(r.ap_small, 0.0, kTol);
  EXPECT_NEAR(r.ap_small_plus, 0.0, kTol);
  EXPECT_NEAR(r.ap_large, 0.09, kTol);
  EXPECT_NEAR(r.ap_large_plus, 0.909, kTol);
  EXPECT_NEAR(r.gain_small, 0.0, kTol);
  EXPECT_NEAR(r.gain_large, 0.819, kTol);
  EXPECT_TRUE(r.submodularity_violated());
}

TEST(Counterexample, LiveEdgeEnumeration) {
  const auto r = submodularity_counterexample();
  EXPECT_NEAR(r.exact_small, 0.0, kTol);
  EXPECT_NEAR(r.exact_small_plus, 0.0, kTol);
  EXPECT_NEAR(r.exact_large, 0.09, kTol);
  // b's coin is shared by both routes into t, so exact IC gives 0.9 here.
  EXPECT_NEAR(r.exact_large_plus, 0.9, kTol);
  // Still not submodular under exact IC: 0 < 0.81.
  EXPECT_LT(r.exact_small_plus - r.exact_small, r.exact_large_plus - r.exact_large);
}

TEST(DagAcceptance, RejectsCycles) {
  const SocialGraph g = parse("0 1 0.5\n1 2 0.5\n2 1 0.5\n2 3 0.5\n");
  EXPECT_THROW(dag_acceptance(g, FriendSet(g, 0, {}), {1, 2, 3}, 3), DomainError);
}

}  // namespace
}  // namespace apm
