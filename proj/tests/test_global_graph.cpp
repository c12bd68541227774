#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "astro/frontend.hpp"
#include "astro/global_graph.hpp"
#include "support.hpp"

using namespace astro;
namespace at = astro::testing;

namespace {

NodeTypeAlphabet small_alphabet(std::size_t n) {
  auto names = at::type_names(n - 1);
  names.push_back("Other");
  return NodeTypeAlphabet(names, {});
}

std::vector<TruncatedAst> random_corpus(std::uint64_t seed, std::size_t n, std::size_t n_types) {
  std::mt19937_64 rng(seed);
  std::vector<TruncatedAst> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(truncate(at::random_tree(rng, 1 + i % 8, n_types), 5));
  return out;
}

}  // namespace

TEST(BuildGraph, ChainGivesInterEdgesOnly) {
  auto a = default_alphabet();
  TypeId f = *a.find("ForStatement"), s = *a.find("Assignment"), m = *a.find("MethodInvocation");
  std::vector<TruncatedAst> corpus = {truncate(at::chain({f, s, m}), 5)};
  auto g = build_graph(corpus, a);
  EXPECT_EQ(g.inter_edges(), (EdgeCounts{{{f, s}, 1}, {{s, m}, 1}}));
  EXPECT_TRUE(g.intra_edges().empty());
  EXPECT_EQ(g.vertex_count(), 19u);
}

TEST(BuildGraph, SiblingsGiveAdjacentIntraEdges) {
  auto a = small_alphabet(5);
  AstNode p{0, 0, {{1, 1, {}}, {2, 1, {}}, {3, 1, {}}}};
  std::vector<TruncatedAst> corpus = {truncate(p, 5)};
  auto g = build_graph(corpus, a);
  EXPECT_EQ(g.inter_edges(), (EdgeCounts{{{0, 1}, 1}, {{0, 2}, 1}, {{0, 3}, 1}}));
  EXPECT_EQ(g.intra_edges(), (EdgeCounts{{{1, 2}, 1}, {{2, 3}, 1}}));
  EXPECT_EQ(g.total_inter(), 3u);
  EXPECT_EQ(g.total_intra(), 2u);
}

TEST(BuildGraph, MatchesBruteForceOnRandomCorpus) {
  auto a = small_alphabet(19);
  auto corpus = random_corpus(11, 20, 19);
  auto g = build_graph(corpus, a);
  std::vector<const AstNode*> roots;
  for (const auto& t : corpus) roots.push_back(&t.root);
  auto [inter, intra] = at::brute_edges(roots);
  EXPECT_EQ(at::as_pair_counts(g.inter_edges()), inter);
  EXPECT_EQ(at::as_pair_counts(g.intra_edges()), intra);
}

TEST(BuildGraph, ConservationIdentities) {
  auto a = small_alphabet(7);
  auto corpus = random_corpus(12, 50, 7);
  auto g = build_graph(corpus, a);
  std::uint64_t non_root = 0, adjacent = 0;
  for (const auto& t : corpus) {
    non_root += node_count(t.root) - 1;
    for_each_node(t.root, [&](const AstNode& n) { adjacent += n.children.empty() ? 0 : n.children.size() - 1; });
  }
  EXPECT_EQ(g.total_inter(), non_root);
  EXPECT_EQ(g.total_intra(), adjacent);
  std::uint64_t sum = 0;
  for (const auto& [k, c] : g.inter_edges()) {
    EXPECT_GE(c, 1u);
    sum += c;
  }
  EXPECT_EQ(sum, g.total_inter());
}

TEST(BuildGraph, OrderInsensitiveAndMergeable) {
  auto a = small_alphabet(9);
  auto corpus = random_corpus(13, 30, 9);
  auto g = build_graph(corpus, a);
  auto shuffled = corpus;
  std::mt19937_64 rng(5);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  EXPECT_EQ(build_graph(shuffled, a), g);

  std::vector<TruncatedAst> left(corpus.begin(), corpus.begin() + 10), right(corpus.begin() + 10, corpus.end());
  auto merged = build_graph(right, a);
  merged.merge(build_graph(left, a));
  EXPECT_EQ(merged, g);
  EXPECT_EQ(merged.total_inter(), g.total_inter());
}

TEST(BuildGraph, RejectsForeignTypeIds) {
  auto a = small_alphabet(3);
  std::vector<TruncatedAst> corpus = {truncate(AstNode{0, 0, {{7, 1, {}}}}, 5)};
  EXPECT_THROW(build_graph(corpus, a), AlphabetMismatch);
}

TEST(BuildGraph, JsonRoundTrip) {
  auto a = small_alphabet(6);
  auto g = build_graph(random_corpus(14, 10, 6), a);
  auto path = std::filesystem::temp_directory_path() / "astro_graph_roundtrip.json";
  g.save(path);
  auto h = GlobalAstGraph::load(path);
  EXPECT_EQ(g, h);
  EXPECT_EQ(g.total_intra(), h.total_intra());
  std::filesystem::remove(path);

  auto bad = g.to_json();
  bad["inter_edges"].push_back({"T0", "Nope", 1});
  EXPECT_THROW(GlobalAstGraph::from_json(bad), AlphabetMismatch);
}

TEST(BuildGraph, NeighborsAreUndirectedAndDistinct) {
  GlobalAstGraph g(at::type_names(4));
  g.add_edge(EdgeKind::Inter, 0, 1, 3);
  g.add_edge(EdgeKind::Intra, 2, 0);
  g.add_edge(EdgeKind::Inter, 1, 0);
  g.add_edge(EdgeKind::Intra, 0, 0);
  EXPECT_EQ(g.neighbors(0), (std::vector<TypeId>{1, 2}));
  EXPECT_EQ(g.neighbors(1), (std::vector<TypeId>{0}));
  EXPECT_TRUE(g.neighbors(3).empty());
}

TEST(SampleEdges, SizeFollowsRatio) {
  GlobalAstGraph g(at::type_names(3));
  g.add_edge(EdgeKind::Inter, 0, 1, 6000);
  g.add_edge(EdgeKind::Intra, 1, 2, 4000);
  EXPECT_EQ(sample_edges(g, 0.001, 1).edges.size(), 10u);
  EXPECT_EQ(sample_edges(g, 0.1, 1).edges.size(), 1000u);
  EXPECT_EQ(sample_edges(g, 1e-9, 1).edges.size(), 1u);
  EXPECT_EQ(sample_size(0, 0.5), 0u);
  EXPECT_EQ(sample_size(3, 0.5), 2u);
}

TEST(SampleEdges, FullRatioReconstructsTables) {
  auto a = small_alphabet(8);
  auto g = build_graph(random_corpus(15, 25, 8), a);
  auto s = sample_edges(g, 1.0, 99);
  EXPECT_EQ(s.edges.size(), g.total_edges());
  EXPECT_EQ(aggregate(s, g.types()), g);
}

TEST(SampleEdges, DeterministicPerSeed) {
  auto a = small_alphabet(8);
  auto g = build_graph(random_corpus(16, 25, 8), a);
  auto s1 = sample_edges(g, 0.2, 7), s2 = sample_edges(g, 0.2, 7), s3 = sample_edges(g, 0.2, 8);
  EXPECT_EQ(s1.edges, s2.edges);
  EXPECT_NE(s1.edges, s3.edges);
  EXPECT_DOUBLE_EQ(s1.sample_ratio, 0.2);
}

TEST(SampleEdges, WithoutReplacementByMultiplicity) {
  GlobalAstGraph g(at::type_names(3));
  g.add_edge(EdgeKind::Inter, 0, 1, 3);
  g.add_edge(EdgeKind::Inter, 1, 2, 1);
  // never more copies of an edge than its multiplicity
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto s = aggregate(sample_edges(g, 0.75, seed), g.types());
    EXPECT_EQ(s.total_edges(), 3u);
    for (const auto& [k, c] : s.inter_edges()) EXPECT_LE(c, g.inter_edges().at(k));
  }
}

TEST(SampleEdges, UniformOverInstances) {
  GlobalAstGraph g(at::type_names(3));
  g.add_edge(EdgeKind::Inter, 0, 1, 30);
  g.add_edge(EdgeKind::Intra, 1, 2, 70);
  const int trials = 4000;
  double hits = 0;
  for (int t = 0; t < trials; ++t) {
    auto s = sample_edges(g, 0.01, static_cast<std::uint64_t>(t));
    hits += s.edges[0].kind == EdgeKind::Inter ? 1 : 0;
  }
  const double p = 0.3, se = std::sqrt(p * (1 - p) / trials);
  EXPECT_NEAR(hits / trials, p, 4 * se);
}

TEST(SampleEdges, Errors) {
  GlobalAstGraph empty(at::type_names(2));
  EXPECT_THROW(sample_edges(empty, 0.5, 0), EmptyGraph);
  GlobalAstGraph g(at::type_names(2));
  g.add_edge(EdgeKind::Inter, 0, 1);
  EXPECT_THROW(sample_edges(g, 0.0, 0), ConfigError);
  EXPECT_THROW(sample_edges(g, 1.5, 0), ConfigError);
}
