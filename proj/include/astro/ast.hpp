#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "astro/alphabet.hpp"

namespace astro {

struct AstNode {
  TypeId type_id = 0;
  std::size_t depth = 0;
  std::vector<AstNode> children;

  bool operator==(const AstNode&) const = default;
};

// Same type ids and shape; depth annotations are ignored.
inline bool structurally_equal(const AstNode& a, const AstNode& b) {
  if (a.type_id != b.type_id || a.children.size() != b.children.size()) return false;
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!structurally_equal(a.children[i], b.children[i])) return false;
  return true;
}

inline std::size_t node_count(const AstNode& n) {
  std::size_t count = 1;
  for (const auto& c : n.children) count += node_count(c);
  return count;
}

// Height of the tree in edges (a single node has height 0).
inline std::size_t height(const AstNode& n) {
  std::size_t h = 0;
  for (const auto& c : n.children) h = std::max(h, height(c) + 1);
  return h;
}

// Rewrites depth fields so the root sits at `depth`.
inline void assign_depths(AstNode& n, std::size_t depth = 0) {
  n.depth = depth;
  for (auto& c : n.children) assign_depths(c, depth + 1);
}

// Preorder visit of every node.
template <typename Fn>
void for_each_node(const AstNode& n, Fn&& fn) {
  fn(n);
  for (const auto& c : n.children) for_each_node(c, fn);
}

struct TruncatedAst {
  AstNode root;
  std::size_t k = 5;
  std::string source_id;
};

// Keeps nodes at depth 0..k, measured from `root` (whose own depth is normalised to 0).
inline TruncatedAst truncate(const AstNode& root, std::size_t k, std::string source_id = {}) {
  if (k < 1) throw ConfigError("truncation depth k must be >= 1");
  std::function<AstNode(const AstNode&, std::size_t)> copy = [&](const AstNode& n, std::size_t depth) {
    AstNode out{n.type_id, depth, {}};
    if (depth < k) {
      out.children.reserve(n.children.size());
      for (const auto& c : n.children) out.children.push_back(copy(c, depth + 1));
    }
    return out;
  };
  return TruncatedAst{copy(root, 0), k, std::move(source_id)};
}

// Compact textual form, e.g. "3(14 16(17))", for diagnostics and tests.
inline std::string to_sexpr(const AstNode& n) {
  std::string s = std::to_string(n.type_id);
  if (!n.children.empty()) {
    s += '(';
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      if (i) s += ' ';
      s += to_sexpr(n.children[i]);
    }
    s += ')';
  }
  return s;
}

}  // namespace astro
