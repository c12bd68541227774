#include <gtest/gtest.h>

#include <random>

#include "astro/subgraph_embed.hpp"
#include "support.hpp"

using namespace astro;
namespace at = astro::testing;

namespace {

// Grows a random tree one node at a time up to `target` nodes.
std::size_t grow_tree(std::mt19937_64& rng, AstNode& out, std::size_t target) {
  std::uniform_int_distribution<TypeId> type(0, 5);
  out = AstNode{type(rng), 0, {}};
  std::vector<std::vector<std::size_t>> path{{}};
  for (std::size_t i = 1; i < target; ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, path.size() - 1);
    auto p = path[pick(rng)];
    AstNode* n = &out;
    for (auto idx : p) n = &n->children[idx];
    n->children.push_back(AstNode{type(rng), n->depth + 1, {}});
    p.push_back(n->children.size() - 1);
    path.push_back(p);
  }
  return path.size();
}

}  // namespace

TEST(Merged, LeafIsItsRow) {
  std::mt19937_64 rng(1);
  auto t = at::random_table(rng, at::type_names(4), 5);
  TruncatedAst tree{AstNode{2, 0, {}}, 5, "p"};
  auto e = merged_embedding(tree, t);
  EXPECT_EQ(e.source_id, "p");
  EXPECT_TRUE(std::equal(e.vector.begin(), e.vector.end(), t.row(2).begin()));
  EXPECT_EQ(flat_embedding(tree, t).vector, e.vector);
}

TEST(Merged, OneLevelIsThreeTermMean) {
  std::mt19937_64 rng(2);
  auto t = at::random_table(rng, at::type_names(4), 5);
  TruncatedAst tree{AstNode{0, 0, {{1, 1, {}}, {2, 1, {}}}}, 5, "p"};
  auto m = merged_embedding(tree, t), f = flat_embedding(tree, t);
  for (std::size_t d = 0; d < 5; ++d) {
    const double expect = (t.row(0)[d] + t.row(1)[d] + t.row(2)[d]) / 3;
    EXPECT_NEAR(m.vector[d], expect, 1e-15);
    EXPECT_NEAR(f.vector[d], expect, 1e-15);
  }
}

TEST(Merged, ChildrenOnlyRule) {
  std::mt19937_64 rng(3);
  auto t = at::random_table(rng, at::type_names(4), 3);
  TruncatedAst tree{AstNode{0, 0, {{1, 1, {}}, {2, 1, {{3, 2, {}}}}}}, 5, "p"};
  auto m = merged_embedding(tree, t, MergeRule::ChildrenOnly);
  for (std::size_t d = 0; d < 3; ++d) EXPECT_NEAR(m.vector[d], (t.row(1)[d] + t.row(3)[d]) / 2, 1e-15);
}

TEST(Merged, MatchesRecursiveOracle) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    auto t = at::random_table(rng, at::type_names(6), 8);
    TruncatedAst tree;
    ASSERT_EQ(grow_tree(rng, tree.root, 30), 30u);
    ASSERT_EQ(node_count(tree.root), 30u);
    auto m = merged_embedding(tree, t);
    auto oracle = at::merge_oracle(tree.root, t);
    for (std::size_t d = 0; d < 8; ++d) EXPECT_NEAR(m.vector[d], oracle[d], 1e-12);
    auto c = merged_embedding(tree, t, MergeRule::ChildrenOnly);
    auto c_oracle = at::merge_oracle(tree.root, t, false);
    for (std::size_t d = 0; d < 8; ++d) EXPECT_NEAR(c.vector[d], c_oracle[d], 1e-12);
  }
}

TEST(Flat, ChainDiffersFromMerged) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto t = at::random_table(rng, at::type_names(3), 6);
    TruncatedAst tree{at::chain({0, 1, 2}), 5, "c"};
    auto m = merged_embedding(tree, t), f = flat_embedding(tree, t);
    for (std::size_t d = 0; d < 6; ++d) {
      const double r = t.row(0)[d], a = t.row(1)[d], b = t.row(2)[d];
      EXPECT_NEAR(f.vector[d], (r + a + b) / 3, 1e-15);
      EXPECT_NEAR(m.vector[d], (r + (a + b) / 2) / 2, 1e-15);
    }
    EXPECT_GT(at::l2(m.vector, f.vector), 1e-6);
  }
}

TEST(Flat, AgreesWithMergedOnShallowTrees) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    auto t = at::random_table(rng, at::type_names(5), 4);
    TruncatedAst tree{at::random_tree(rng, trial % 2, 5, 6), 5, "s"};
    auto m = merged_embedding(tree, t), f = flat_embedding(tree, t);
    for (std::size_t d = 0; d < 4; ++d) EXPECT_NEAR(m.vector[d], f.vector[d], 1e-12);
  }
}

TEST(Merged, StaysInsideHull) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    auto t = at::random_table(rng, at::type_names(6), 5);
    TruncatedAst tree{at::random_tree(rng, 1 + trial % 6, 6), 5, "h"};
    for (auto mode : {0, 1}) {
      auto v = mode ? flat_embedding(tree, t).vector : merged_embedding(tree, t).vector;
      for (std::size_t d = 0; d < 5; ++d) {
        double lo = 1e300, hi = -1e300;
        for_each_node(tree.root, [&](const AstNode& n) {
          lo = std::min(lo, t.row(n.type_id)[d]);
          hi = std::max(hi, t.row(n.type_id)[d]);
        });
        EXPECT_GE(v[d], lo - 1e-12);
        EXPECT_LE(v[d], hi + 1e-12);
      }
    }
  }
}

TEST(Merged, StructurallyEqualTreesGiveEqualVectors) {
  std::mt19937_64 rng(8);
  auto t = at::random_table(rng, at::type_names(6), 5);
  auto tree = at::random_tree(rng, 5, 6);
  TruncatedAst a{tree, 5, "a"}, b{tree, 5, "b"};
  EXPECT_EQ(merged_embedding(a, t).vector, merged_embedding(b, t).vector);
}

TEST(Merged, MissingType) {
  std::mt19937_64 rng(9);
  auto t = at::random_table(rng, at::type_names(2), 3);
  TruncatedAst tree{AstNode{0, 0, {{5, 1, {}}}}, 5, "m"};
  EXPECT_THROW(merged_embedding(tree, t), MissingEmbedding);
  EXPECT_THROW(flat_embedding(tree, t), MissingEmbedding);
}
