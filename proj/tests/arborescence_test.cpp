#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "apm/arborescence.hpp"
#include "oracles.hpp"

namespace apm {
namespace {

SocialGraph parse(const std::string& text) {
  std::istringstream in(text);
  return load_edge_list(in);
}

// Node ids: s=0, a=1, b=2, t=3.
const char* kChain = "0 1 1.0\n1 2 0.9\n2 3 0.1\n";

TEST(MaxInfluenceTree, ChainProduct) {
  const SocialGraph g = parse(kChain);
  const MaxInfluenceTree mip = max_influence_tree(g, 3);
  EXPECT_NEAR(mip.path_prob[*g.index_of(1)], 0.09, 1e-15);
  EXPECT_DOUBLE_EQ(mip.path_prob[*g.index_of(3)], 1.0);
  EXPECT_EQ(mip.next_hop[*g.index_of(3)], kNoIndex);
  EXPECT_EQ(g.id_of(mip.next_hop[*g.index_of(1)]), 2u);
}

TEST(MaxInfluenceTree, PicksHeavierOfTwoRoutes) {
  // a=0 -> {1, 2} -> t=3 with products 0.8*0.5=0.4 and 0.5*1.0=0.5.
  const SocialGraph g = parse("0 1 0.8\n1 3 0.5\n0 2 0.5\n2 3 1.0\n");
  const MaxInfluenceTree mip = max_influence_tree(g, 3);
  EXPECT_EQ(g.id_of(mip.next_hop[0]), 2u);
  EXPECT_DOUBLE_EQ(mip.path_prob[0], testing::best_path_probability(g, 0, 3));
  EXPECT_DOUBLE_EQ(mip.path_prob[0], 0.5);
}

TEST(MaxInfluenceTree, TiesGoToSmallerNextHop) {
  const SocialGraph g = parse("0 5 0.5\n5 9 0.5\n0 7 0.5\n7 9 0.5\n");
  const MaxInfluenceTree mip = max_influence_tree(g, 9);
  EXPECT_EQ(g.id_of(mip.next_hop[*g.index_of(0)]), 5u);
}

TEST(MaxInfluenceTree, ZeroWeightArcsAreIgnored) {
  const SocialGraph g = parse("0 1 0.0\n1 2 0.5\n");
  const MaxInfluenceTree mip = max_influence_tree(g, 2);
  EXPECT_FALSE(mip.reaches(*g.index_of(0)));
  EXPECT_TRUE(mip.reaches(*g.index_of(1)));
}

TEST(MaxInfluenceTree, LongPathsSurviveUnderflow) {
  // 0.5^3000 is below the smallest double; the path must still be found.
  GraphBuilder b;
  for (NodeId v = 1; v <= 3000; ++v) b.add_edge(v, v - 1, 0.5);
  b.add_edge(5000, 3000, 0.5);
  b.add_edge(6000, 5000, 1.0);
  const SocialGraph g = std::move(b).build();
  const MaxInfluenceTree mip = max_influence_tree(g, 0);
  EXPECT_TRUE(mip.reaches(*g.index_of(5000)));
  EXPECT_NEAR(mip.cost[*g.index_of(5000)], 3001 * std::log(2.0), 1e-9);
  const Arborescence tree = build_miia(g, FriendSet(g, 6000, {5000}), 0);
  EXPECT_EQ(tree.non_friend_count(), 3001u);
  EXPECT_EQ(tree.node(tree.root()).z, 3001u);
}

// Property: on random small graphs the Dijkstra probabilities equal the best
// simple-path product, and following next hops multiplies out to the same.
TEST(MaxInfluenceTree, MatchesPathEnumeration) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const SocialGraph g = generate_synthetic(9, 3.0, {1.0, 10, 0.95, static_cast<std::uint64_t>(trial + 1)});
    const NodeId t = g.id_of(static_cast<Index>(rng() % g.node_count()));
    const MaxInfluenceTree mip = max_influence_tree(g, t);
    for (Index v = 0; v < g.node_count(); ++v) {
      const double oracle = testing::best_path_probability(g, g.id_of(v), t);
      ASSERT_NEAR(mip.path_prob[v], oracle, 1e-12 * std::max(1.0, oracle));
      double walk = 1.0;
      for (Index u = v; u != mip.target; u = mip.next_hop[u]) walk *= *g.arc_weight(u, mip.next_hop[u]);
      ASSERT_NEAR(walk, mip.path_prob[v], 1e-15);
    }
  }
}

TEST(BuildMiia, ChainWithHomophily) {
  const SocialGraph g = parse(kChain);
  const FriendSet s(g, 0, {1});
  const Arborescence tree = build_miia(g, s, 3, 0.0, HomophilyModel::constant(0.2));
  std::ostringstream dump;
  dump_arborescence(dump, tree);
  EXPECT_EQ(dump.str(),
            "3 ROOT - 2\n"
            "2 3 0.1 1\n"
            "s@3 3 0.2 0\n"
            "1 2 0.9 0\n"
            "s@2 2 0.2 0\n");
  const auto& root = tree.node(tree.root());
  ASSERT_EQ(root.children.size(), 2u);
  EXPECT_EQ(tree.label(root.children[0]), "2");
  EXPECT_EQ(tree.label(root.children[1]), "s@3");
}

TEST(BuildMiia, PlainChainWithoutHomophily) {
  const SocialGraph g = parse(kChain);
  const Arborescence tree = build_miia(g, FriendSet(g, 0, {1}), 3);
  EXPECT_EQ(tree.size(), 3u);  // s is shadowed by a on its path
  EXPECT_EQ(tree.non_friend_count(), 2u);
  EXPECT_EQ(tree.friend_leaves().size(), 1u);
  EXPECT_EQ(tree.node(tree.friend_leaves()[0]).id, 1u);
}

TEST(BuildMiia, ThetaAboveEveryPathLeavesOnlyHomophily) {
  const SocialGraph g = parse(kChain);
  const Arborescence tree = build_miia(g, FriendSet(g, 0, {1}), 3, 0.5, HomophilyModel::constant(0.3));
  ASSERT_EQ(tree.size(), 2u);
  EXPECT_TRUE(tree.node(1).s_copy);
  EXPECT_THROW(build_miia(g, FriendSet(g, 0, {1}), 3, 0.5), DomainError);
}

TEST(BuildMiia, HomophilyAddsOneChildPerNonFriend) {
  // v1=10 gets social influence from v3=13 and v4=14 plus the s channel.
  const SocialGraph g = parse("13 10 0.4\n14 10 0.6\n10 20 0.5\n0 13 1\n0 14 1\n");
  const Arborescence tree = build_miia(g, FriendSet(g, 0, {13, 14}), 20, 0.0, HomophilyModel::constant(0.1));
  const TreeIndex v1 = *tree.find(10);
  EXPECT_EQ(tree.in_degree(v1), 3u);
  EXPECT_TRUE(tree.node(tree.node(v1).children.back()).s_copy);
}

TEST(BuildMiia, Errors) {
  const SocialGraph g = parse(kChain + std::string("7 8 0.5\n"));
  EXPECT_THROW(build_miia(g, FriendSet(g, 0, {1, 3}), 3), DomainError);  // t is a friend
  EXPECT_THROW(build_miia(g, FriendSet(g, 0, {1}), 8), DomainError);     // unreachable
  EXPECT_THROW(build_miia(g, FriendSet(g, 0, {1}), 8, 0.0, HomophilyModel::constant(0.0)), DomainError);
  EXPECT_NO_THROW(build_miia(g, FriendSet(g, 0, {1}), 8, 0.0, HomophilyModel::constant(0.4)));
  EXPECT_THROW(build_miia(g, FriendSet(g, 0, {1}), 99), DomainError);
}

TEST(BuildMiia, FriendOnAnotherFriendsPathIsALeaf) {
  // f1=1 -> f2=2 -> x=3 -> t=4; f2 is a friend so 1 is cut off.
  const SocialGraph g = parse("1 2 0.9\n2 3 0.9\n3 4 0.9\n0 1 1\n");
  const Arborescence tree = build_miia(g, FriendSet(g, 0, {1, 2}), 4);
  EXPECT_FALSE(tree.find(1).has_value());
  EXPECT_TRUE(tree.node(*tree.find(2)).children.empty());
}

// Properties on random trees: topo order, z, leaves, path products.
TEST(BuildMiia, InvariantsOnRandomInstances) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    testing::TreeShape shape;
    shape.non_friend = 1 + rng() % 25;
    const auto inst = testing::random_tree_instance(rng, shape);
    const Arborescence tree = inst.tree();
    const FriendSet fs = inst.friend_set();

    std::vector<std::size_t> pos(tree.size());
    for (std::size_t i = 0; i < tree.topo_order().size(); ++i) pos[tree.topo_order()[i]] = i;
    ASSERT_EQ(std::set<TreeIndex>(tree.topo_order().begin(), tree.topo_order().end()).size(), tree.size());
    for (TreeIndex v = 1; v < tree.size(); ++v) ASSERT_LT(pos[v], pos[tree.node(v).parent]);

    const auto z = subtree_counts(tree, fs);
    for (TreeIndex v = 0; v < tree.size(); ++v) ASSERT_EQ(z[v], tree.node(v).z);
    ASSERT_EQ(tree.non_friend_count(), inst.non_friend);

    for (TreeIndex v = 0; v < tree.size(); ++v)
      if (tree.node(v).children.empty()) {
        ASSERT_TRUE(tree.is_friend(v));
      }

    // Brute-force z: count non-friends by walking up from each node.
    std::vector<std::size_t> z_walk(tree.size(), 0);
    for (TreeIndex v = 0; v < tree.size(); ++v) {
      if (tree.is_friend(v)) continue;
      for (TreeIndex u = v; u != kNoParent; u = tree.node(u).parent) ++z_walk[u];
    }
    for (TreeIndex v = 0; v < tree.size(); ++v) ASSERT_EQ(z_walk[v], tree.node(v).z);

    const MaxInfluenceTree mip = max_influence_tree(inst.graph, inst.target);
    for (TreeIndex v = 1; v < tree.size(); ++v) {
      if (tree.node(v).s_copy) continue;
      double prod = 1.0;
      for (TreeIndex u = v; u != tree.root(); u = tree.node(u).parent) prod *= tree.node(u).weight;
      ASSERT_NEAR(prod, mip.path_prob[*inst.graph.index_of(tree.node(v).id)], 1e-15);
    }
  }
}

TEST(BuildMiia, ZeroHomophilyGivesPlainTree) {
  std::mt19937_64 rng(8);
  testing::TreeShape shape;
  shape.non_friend = 12;
  const auto inst = testing::random_tree_instance(rng, shape);
  const Arborescence with_zero =
      build_miia(inst.graph, inst.friend_set(), inst.target, 0.0, HomophilyModel::constant(0.0));
  const Arborescence plain = build_miia(inst.graph, inst.friend_set(), inst.target);
  ASSERT_EQ(with_zero.size(), plain.size());
  for (TreeIndex v : with_zero.friend_leaves()) {
    EXPECT_FALSE(with_zero.node(v).s_copy);
    EXPECT_TRUE(inst.friend_set().contains(with_zero.node(v).id));
  }
}

TEST(SubtreeCounts, SmallCases) {
  // x=5 has two friend leaves 1, 2; t=6 has x.
  const SocialGraph g = parse("1 5 0.5\n2 5 0.5\n5 6 0.5\n0 1 1\n");
  const Arborescence tree = build_miia(g, FriendSet(g, 0, {1, 2}), 6);
  EXPECT_EQ(tree.node(*tree.find(1)).z, 0u);
  EXPECT_EQ(tree.node(*tree.find(5)).z, 1u);
  EXPECT_EQ(tree.node(tree.root()).z, 2u);
}

}  // namespace
}  // namespace apm
