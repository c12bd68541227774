#include <gtest/gtest.h>

#include "astro/ast.hpp"
#include "support.hpp"

using namespace astro;
using astro::testing::brute_count_upto;
using astro::testing::chain;
using astro::testing::random_tree;

TEST(Truncate, ChainOfEightKeepsSixLevels) {
  auto c = chain({0, 1, 2, 3, 4, 5, 6, 7});
  ASSERT_EQ(node_count(c), 8u);
  auto t = truncate(c, 5);
  EXPECT_EQ(node_count(t.root), 6u);
  EXPECT_EQ(height(t.root), 5u);
  const AstNode* n = &t.root;
  for (std::size_t d = 0; d <= 5; ++d) {
    EXPECT_EQ(n->depth, d);
    EXPECT_EQ(n->type_id, d);
    if (d < 5) n = &n->children.at(0);
  }
  EXPECT_TRUE(n->children.empty());
}

TEST(Truncate, ShallowTreeUnchanged) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    auto t = random_tree(rng, 3, 7);
    for (std::size_t k : {3, 4, 9}) {
      auto tr = truncate(t, k);
      EXPECT_TRUE(structurally_equal(tr.root, t));
      EXPECT_EQ(tr.root, t);  // depths too
    }
  }
}

TEST(Truncate, MatchesBruteForceCount) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    auto t = random_tree(rng, 1 + i % 12, 19);
    for (std::size_t k = 1; k <= 12; ++k) EXPECT_EQ(node_count(truncate(t, k).root), brute_count_upto(t, k));
  }
}

TEST(Truncate, IdempotentMonotoneAndBounded) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    auto t = random_tree(rng, i % 13, 19);
    for (std::size_t k = 1; k <= 8; ++k) {
      auto once = truncate(t, k);
      auto twice = truncate(once.root, k);
      EXPECT_EQ(once.root, twice.root);
      EXPECT_LE(height(once.root), k);
      EXPECT_LE(node_count(once.root), node_count(truncate(t, k + 1).root));
      for_each_node(once.root, [&](const AstNode& n) { EXPECT_LE(n.depth, k); });
    }
  }
}

TEST(Truncate, OnlyDepthKNodesLoseChildren) {
  std::mt19937_64 rng(4);
  auto t = random_tree(rng, 9, 5);
  auto tr = truncate(t, 4);
  std::function<void(const AstNode&, const AstNode&)> walk = [&](const AstNode& orig, const AstNode& cut) {
    if (cut.depth < 4) {
      ASSERT_EQ(orig.children.size(), cut.children.size());
      for (std::size_t i = 0; i < orig.children.size(); ++i) walk(orig.children[i], cut.children[i]);
    } else {
      EXPECT_TRUE(cut.children.empty());
    }
  };
  walk(t, tr.root);
}

TEST(Truncate, RejectsZeroK) {
  AstNode leaf{};
  EXPECT_THROW(truncate(leaf, 0), ConfigError);
}

TEST(Truncate, KeepsSourceId) {
  AstNode leaf{};
  EXPECT_EQ(truncate(leaf, 2, "p7").source_id, "p7");
}
