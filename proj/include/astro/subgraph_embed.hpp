#pragma once

#include <string>
#include <vector>

#include "astro/ast.hpp"
#include "astro/error.hpp"
#include "astro/graph_learning.hpp"

namespace astro {

struct SubgraphEmbedding {
  std::string source_id;
  std::vector<double> vector;

  std::size_t dim() const noexcept { return vector.size(); }
};

enum class MergeRule {
  SelfInclusive,  // mean of the node's own row and its children's merged vectors
  ChildrenOnly,   // mean of the children's merged vectors only
};

namespace detail {

inline std::span<const double> lookup(const EmbeddingTable& table, TypeId id) {
  if (id >= table.size()) throw MissingEmbedding("no embedding for type id " + std::to_string(id));
  return table.row(id);
}

inline std::vector<double> merge_node(const AstNode& n, const EmbeddingTable& table, MergeRule rule) {
  auto own = lookup(table, n.type_id);
  std::vector<double> acc(table.dim, 0.0);
  if (n.children.empty()) {
    acc.assign(own.begin(), own.end());
    return acc;
  }
  std::size_t terms = 0;
  if (rule == MergeRule::SelfInclusive) {
    for (std::size_t d = 0; d < table.dim; ++d) acc[d] += own[d];
    ++terms;
  }
  for (const auto& c : n.children) {
    auto m = merge_node(c, table, rule);
    for (std::size_t d = 0; d < table.dim; ++d) acc[d] += m[d];
    ++terms;
  }
  for (auto& x : acc) x /= static_cast<double>(terms);
  return acc;
}

}  // namespace detail

// Bottom-up merge: leaves contribute their row, each internal node the mean of
// its own row (under SelfInclusive) and its children's merged vectors.
inline SubgraphEmbedding merged_embedding(const TruncatedAst& tree, const EmbeddingTable& table,
                                          MergeRule rule = MergeRule::SelfInclusive) {
  return {tree.source_id, detail::merge_node(tree.root, table, rule)};
}

// Mean of the rows of all nodes, ignoring the hierarchy.
inline SubgraphEmbedding flat_embedding(const TruncatedAst& tree, const EmbeddingTable& table) {
  std::vector<double> acc(table.dim, 0.0);
  std::size_t count = 0;
  for_each_node(tree.root, [&](const AstNode& n) {
    auto r = detail::lookup(table, n.type_id);
    for (std::size_t d = 0; d < table.dim; ++d) acc[d] += r[d];
    ++count;
  });
  for (auto& x : acc) x /= static_cast<double>(count);
  return {tree.source_id, std::move(acc)};
}

}  // namespace astro
