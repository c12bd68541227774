#pragma once

// Shared fixtures and brute-force oracles for the test binaries.

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "astro/ast.hpp"
#include "astro/global_graph.hpp"
#include "astro/graph_learning.hpp"

namespace astro::testing {

// Random tree of exactly `height` edges along one spine, with random bushy
// side branches, over `n_types` type ids.
inline AstNode random_tree(std::mt19937_64& rng, std::size_t height, std::size_t n_types, std::size_t max_children = 3,
                           std::size_t depth = 0) {
  std::uniform_int_distribution<std::size_t> type(0, n_types - 1);
  AstNode n{static_cast<TypeId>(type(rng)), depth, {}};
  if (height == 0) return n;
  std::uniform_int_distribution<std::size_t> fan(1, max_children);
  const std::size_t kids = fan(rng);
  std::uniform_int_distribution<std::size_t> spine_at(0, kids - 1);
  const std::size_t spine = spine_at(rng);
  for (std::size_t i = 0; i < kids; ++i) {
    std::size_t h = height - 1;
    if (i != spine) {
      // side branches are shallower so trees of height 12 stay small
      std::uniform_int_distribution<std::size_t> side(0, std::min<std::size_t>(h, 2));
      h = side(rng);
    }
    n.children.push_back(random_tree(rng, h, n_types, max_children, depth + 1));
  }
  return n;
}

inline AstNode chain(const std::vector<TypeId>& types) {
  AstNode root{types.back(), 0, {}};
  for (std::size_t i = types.size() - 1; i-- > 0;) root = AstNode{types[i], 0, {std::move(root)}};
  assign_depths(root);
  return root;
}

// Counts nodes at depth <= k by explicit stack traversal.
inline std::size_t brute_count_upto(const AstNode& root, std::size_t k) {
  std::size_t count = 0;
  std::vector<std::pair<const AstNode*, std::size_t>> stack{{&root, 0}};
  while (!stack.empty()) {
    auto [n, d] = stack.back();
    stack.pop_back();
    if (d <= k) ++count;
    for (const auto& c : n->children) stack.push_back({&c, d + 1});
  }
  return count;
}

using PairCounts = std::map<std::pair<int, int>, std::uint64_t>;

// Collects all nodes first, then enumerates (parent, child) and adjacent
// sibling pairs from the flat list.
inline std::pair<PairCounts, PairCounts> brute_edges(const std::vector<const AstNode*>& roots) {
  PairCounts inter, intra;
  std::vector<const AstNode*> all;
  for (auto* r : roots) {
    std::vector<const AstNode*> stack{r};
    while (!stack.empty()) {
      auto* n = stack.back();
      stack.pop_back();
      all.push_back(n);
      for (const auto& c : n->children) stack.push_back(&c);
    }
  }
  for (auto* p : all) {
    for (std::size_t i = 0; i < p->children.size(); ++i) {
      ++inter[{p->type_id, p->children[i].type_id}];
      for (std::size_t j = 0; j < p->children.size(); ++j)
        if (j == i + 1) ++intra[{p->children[i].type_id, p->children[j].type_id}];
    }
  }
  return {inter, intra};
}

inline PairCounts as_pair_counts(const EdgeCounts& e) {
  PairCounts out;
  for (const auto& [k, c] : e) out[{k.first, k.second}] = c;
  return out;
}

inline std::vector<std::string> type_names(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("T" + std::to_string(i));
  return names;
}

inline EmbeddingTable random_table(std::mt19937_64& rng, std::vector<std::string> names, std::size_t dim) {
  std::normal_distribution<double> g;
  EmbeddingTable t{dim, std::move(names), {}, 0, false};
  t.values.resize(t.names.size() * dim);
  for (auto& v : t.values) v = g(rng);
  return t;
}

// Recursive merge oracle written from the definition, independent of the library.
inline std::vector<double> merge_oracle(const AstNode& n, const EmbeddingTable& t, bool self_inclusive = true) {
  std::vector<std::vector<double>> terms;
  if (n.children.empty() || self_inclusive) {
    auto r = t.row(n.type_id);
    terms.emplace_back(r.begin(), r.end());
  }
  for (const auto& c : n.children) terms.push_back(merge_oracle(c, t, self_inclusive));
  std::vector<double> out(t.dim, 0.0);
  for (std::size_t d = 0; d < t.dim; ++d) {
    for (const auto& v : terms) out[d] += v[d];
    out[d] /= static_cast<double>(terms.size());
  }
  return out;
}

inline double l2(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({1e-8, std::abs(a), std::abs(b)}); }

}  // namespace astro::testing
