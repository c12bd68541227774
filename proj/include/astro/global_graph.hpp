#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "astro/alphabet.hpp"
#include "astro/ast.hpp"
#include "astro/error.hpp"
#include "astro/rng.hpp"

namespace astro {

using EdgeKey = std::pair<TypeId, TypeId>;
using EdgeCounts = std::map<EdgeKey, std::uint64_t>;

enum class EdgeKind : std::uint8_t { Inter, Intra };

// Corpus-wide co-occurrence graph over node types. Inter-hierarchy edges are
// directed parent -> child, intra-hierarchy edges left sibling -> right sibling
// (adjacent siblings only). Counts are multiplicities.
class GlobalAstGraph {
 public:
  GlobalAstGraph() = default;
  explicit GlobalAstGraph(std::vector<std::string> types) : types_(std::move(types)) {}

  const std::vector<std::string>& types() const noexcept { return types_; }
  std::size_t vertex_count() const noexcept { return types_.size(); }
  const EdgeCounts& inter_edges() const noexcept { return inter_; }
  const EdgeCounts& intra_edges() const noexcept { return intra_; }
  std::uint64_t total_inter() const noexcept { return total_inter_; }
  std::uint64_t total_intra() const noexcept { return total_intra_; }
  std::uint64_t total_edges() const noexcept { return total_inter_ + total_intra_; }
  bool empty() const noexcept { return total_edges() == 0; }

  void add_edge(EdgeKind kind, TypeId src, TypeId dst, std::uint64_t count = 1) {
    if (src >= types_.size() || dst >= types_.size())
      throw AlphabetMismatch("edge endpoint outside the alphabet (" + std::to_string(src) + ", " +
                             std::to_string(dst) + ")");
    if (count == 0) return;
    if (kind == EdgeKind::Inter) {
      inter_[{src, dst}] += count;
      total_inter_ += count;
    } else {
      intra_[{src, dst}] += count;
      total_intra_ += count;
    }
    adjacency_.clear();
  }

  void add_tree(const AstNode& node) {
    if (node.type_id >= types_.size())
      throw AlphabetMismatch("tree references type id " + std::to_string(node.type_id) + " outside the alphabet");
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      add_edge(EdgeKind::Inter, node.type_id, node.children[i].type_id);
      if (i + 1 < node.children.size())
        add_edge(EdgeKind::Intra, node.children[i].type_id, node.children[i + 1].type_id);
      add_tree(node.children[i]);
    }
  }

  // Commutative merge of partial counts (e.g. from parallel workers).
  void merge(const GlobalAstGraph& other) {
    if (other.types_ != types_) throw AlphabetMismatch("cannot merge graphs over different alphabets");
    for (const auto& [k, c] : other.inter_) add_edge(EdgeKind::Inter, k.first, k.second, c);
    for (const auto& [k, c] : other.intra_) add_edge(EdgeKind::Intra, k.first, k.second, c);
  }

  // Distinct undirected neighbours of v (either edge kind, either direction), excluding v, ascending.
  const std::vector<TypeId>& neighbors(TypeId v) const {
    if (adjacency_.size() != types_.size()) build_adjacency();
    return adjacency_.at(v);
  }

  bool operator==(const GlobalAstGraph& o) const {
    return types_ == o.types_ && inter_ == o.inter_ && intra_ == o.intra_;
  }

  nlohmann::json to_json() const {
    auto edges = [&](const EdgeCounts& table) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& [k, c] : table) arr.push_back({types_[k.first], types_[k.second], c});
      return arr;
    };
    return {{"types", types_}, {"inter_edges", edges(inter_)}, {"intra_edges", edges(intra_)}};
  }

  static GlobalAstGraph from_json(const nlohmann::json& j) {
    if (!j.contains("types") || !j.contains("inter_edges") || !j.contains("intra_edges"))
      throw FormatError("graph", 0, "graph JSON needs 'types', 'inter_edges' and 'intra_edges'");
    GlobalAstGraph g(j["types"].get<std::vector<std::string>>());
    std::unordered_map<std::string, TypeId> index;
    for (std::size_t i = 0; i < g.types_.size(); ++i) index.emplace(g.types_[i], static_cast<TypeId>(i));
    auto id_of = [&](const nlohmann::json& v) -> TypeId {
      auto it = index.find(v.get<std::string>());
      if (it == index.end()) throw AlphabetMismatch("graph edge references unknown type " + v.dump());
      return it->second;
    };
    for (auto kind : {EdgeKind::Inter, EdgeKind::Intra}) {
      for (const auto& e : j[kind == EdgeKind::Inter ? "inter_edges" : "intra_edges"]) {
        if (!e.is_array() || e.size() != 3) throw FormatError("graph", 0, "edge entries are [src, dst, count]");
        auto count = e[2].get<std::uint64_t>();
        if (count == 0) throw FormatError("graph", 0, "edge counts must be >= 1");
        g.add_edge(kind, id_of(e[0]), id_of(e[1]), count);
      }
    }
    return g;
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << to_json().dump() << '\n';
  }

  static GlobalAstGraph load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open graph file " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string(), 0, e.what());
    }
    return from_json(j);
  }

 private:
  std::vector<std::string> types_;
  EdgeCounts inter_;
  EdgeCounts intra_;
  std::uint64_t total_inter_ = 0;
  std::uint64_t total_intra_ = 0;
  mutable std::vector<std::vector<TypeId>> adjacency_;

  void build_adjacency() const {
    std::vector<std::set<TypeId>> sets(types_.size());
    for (const auto* table : {&inter_, &intra_}) {
      for (const auto& [k, c] : *table) {
        if (k.first == k.second) continue;
        sets[k.first].insert(k.second);
        sets[k.second].insert(k.first);
      }
    }
    adjacency_.assign(types_.size(), {});
    for (std::size_t v = 0; v < sets.size(); ++v) adjacency_[v].assign(sets[v].begin(), sets[v].end());
  }
};

inline GlobalAstGraph build_graph(std::span<const TruncatedAst> corpus, const NodeTypeAlphabet& alphabet) {
  GlobalAstGraph g(alphabet.types());
  for (const auto& tree : corpus) g.add_tree(tree.root);
  return g;
}

struct SampledEdge {
  TypeId src = 0;
  TypeId dst = 0;
  EdgeKind kind = EdgeKind::Inter;

  bool operator==(const SampledEdge&) const = default;
};

struct EdgeSample {
  std::vector<SampledEdge> edges;
  double sample_ratio = 1.0;
};

inline std::uint64_t sample_size(std::uint64_t total, double ratio) {
  if (total == 0) return 0;
  auto n = static_cast<std::uint64_t>(std::llround(ratio * static_cast<double>(total)));
  return std::clamp<std::uint64_t>(n, 1, total);
}

// Uniform sample without replacement from the multiset of edge instances.
// Uses a sparse Fisher-Yates shuffle so memory is proportional to the sample,
// not to the corpus edge mass.
inline EdgeSample sample_edges(const GlobalAstGraph& graph, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("sample ratio must lie in (0, 1]");
  if (graph.empty()) throw EmptyGraph("global AST graph has no edges to sample");

  struct Entry {
    std::uint64_t end;  // exclusive prefix sum of multiplicities
    SampledEdge edge;
  };
  std::vector<Entry> entries;
  std::uint64_t running = 0;
  for (auto kind : {EdgeKind::Inter, EdgeKind::Intra}) {
    for (const auto& [k, c] : kind == EdgeKind::Inter ? graph.inter_edges() : graph.intra_edges()) {
      running += c;
      entries.push_back({running, {k.first, k.second, kind}});
    }
  }
  const std::uint64_t total = running;
  const std::uint64_t n = sample_size(total, ratio);

  auto edge_at = [&](std::uint64_t index) {
    auto it = std::upper_bound(entries.begin(), entries.end(), index,
                               [](std::uint64_t i, const Entry& e) { return i < e.end; });
    return it->edge;
  };

  Rng rng(derive_seed(seed, "sample_edges"));
  std::unordered_map<std::uint64_t, std::uint64_t> swapped;
  auto value = [&](std::uint64_t i) {
    auto it = swapped.find(i);
    return it == swapped.end() ? i : it->second;
  };
  EdgeSample sample{{}, ratio};
  sample.edges.reserve(static_cast<std::size_t>(n));
  for (std::uint64_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::uint64_t> pick(i, total - 1);
    std::uint64_t j = pick(rng);
    std::uint64_t vi = value(i), vj = value(j);
    swapped[j] = vi;
    swapped[i] = vj;
    sample.edges.push_back(edge_at(vj));
  }
  return sample;
}

// Re-aggregates sampled edges into count tables over the same vertex set.
inline GlobalAstGraph aggregate(const EdgeSample& sample, const std::vector<std::string>& types) {
  GlobalAstGraph g(types);
  for (const auto& e : sample.edges) g.add_edge(e.kind, e.src, e.dst);
  return g;
}

}  // namespace astro
