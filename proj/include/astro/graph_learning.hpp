#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "astro/embedding_io.hpp"
#include "astro/error.hpp"
#include "astro/global_graph.hpp"
#include "astro/rng.hpp"

namespace astro {

// One dense vector per node type, stored row-major.
struct EmbeddingTable {
  std::size_t dim = 0;
  std::vector<std::string> names;
  std::vector<double> values;
  std::uint64_t seed = 0;
  bool trained = false;

  std::size_t size() const noexcept { return names.size(); }
  std::span<double> row(std::size_t i) { return {values.data() + i * dim, dim}; }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }

  bool all_finite() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
  }

  EmbeddingFile to_file() const {
    EmbeddingFile f(static_cast<std::uint32_t>(dim));
    for (std::size_t i = 0; i < names.size(); ++i) f.add(names[i], row(i));
    return f;
  }

  // Rows are looked up by name, so `types` fixes the row order of the result.
  static EmbeddingTable from_file(const EmbeddingFile& f, const std::vector<std::string>& types) {
    EmbeddingTable t{f.dim(), types, {}, 0, true};
    t.values.reserve(types.size() * t.dim);
    for (const auto& name : types) {
      auto r = f.at(name);
      t.values.insert(t.values.end(), r.begin(), r.end());
    }
    return t;
  }
};

// Word vectors keyed by node-type name. Reads word2vec-style text
// ("name v1 v2 ...", optional "count dim" header line) or ASTROEMB binary.
struct WordVectorFile {
  std::size_t dim_w = 0;
  std::map<std::string, std::vector<double>> entries;

  static WordVectorFile parse_text(std::istream& in, const std::string& name = "words") {
    WordVectorFile w;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::istringstream ss(line);
      std::string word;
      if (!(ss >> word)) continue;
      std::vector<double> vec;
      double v;
      while (ss >> v) vec.push_back(v);
      if (!ss.eof()) throw FormatError(name, lineno, "non-numeric component");
      if (lineno == 1 && vec.size() == 1 && word.find_first_not_of("0123456789") == std::string::npos) continue;
      if (vec.empty()) throw FormatError(name, lineno, "entry '" + word + "' has no components");
      if (w.dim_w == 0) w.dim_w = vec.size();
      if (vec.size() != w.dim_w)
        throw FormatError(name, lineno, "entry has " + std::to_string(vec.size()) + " components, expected " +
                                            std::to_string(w.dim_w));
      w.entries[word] = std::move(vec);
    }
    return w;
  }

  static WordVectorFile load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open word-vector file " + path.string());
    std::string head(kEmbMagic.size(), '\0');
    in.read(head.data(), static_cast<std::streamsize>(head.size()));
    if (in && head == kEmbMagic) {
      auto f = EmbeddingFile::load(path);
      WordVectorFile w{f.dim(), {}};
      for (std::size_t i = 0; i < f.size(); ++i) {
        auto r = f.row(i);
        w.entries[f.ids()[i]] = std::vector<double>(r.begin(), r.end());
      }
      return w;
    }
    in.clear();
    in.seekg(0);
    return parse_text(in, path.string());
  }
};

struct TrainConfig {
  std::size_t epochs = 50;
  double learning_rate = 1e-3;
  std::size_t negative_samples = 5;
  std::size_t neighbor_sample_size = 10;
  double sample_ratio = 0.001;
  std::size_t dim = 256;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (neighbor_sample_size == 0) throw ConfigError("neighbor_sample_size must be positive");
    if (dim == 0) throw ConfigError("dim must be positive");
    if (!(sample_ratio > 0.0 && sample_ratio <= 1.0)) throw ConfigError("sample_ratio must lie in (0, 1]");
  }
};

namespace detail {

inline double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// -log(sigmoid(x)), overflow-safe.
inline double neg_log_sigmoid(double x) { return std::log1p(std::exp(-std::abs(x))) + std::max(-x, 0.0); }

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// Position of each type in name order; used so every random choice is keyed
// by type names rather than by numeric ids.
inline std::vector<std::size_t> name_ranks(const std::vector<std::string>& names) {
  std::vector<std::size_t> order(names.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return names[a] < names[b]; });
  std::vector<std::size_t> rank(names.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;
  return rank;
}

}  // namespace detail

inline EmbeddingTable init_embeddings(const std::vector<std::string>& types, const WordVectorFile* words,
                                      std::size_t dim, std::uint64_t seed) {
  if (dim < 1) throw DimensionError("embedding dim must be >= 1");
  if (words && words->dim_w < 1 && !words->entries.empty()) throw DimensionError("word vectors have width 0");
  EmbeddingTable t{dim, types, std::vector<double>(types.size() * dim, 0.0), seed, false};

  std::vector<double> projection;
  if (words && words->dim_w > 0) {
    Rng rng(derive_seed(seed, "projection"));
    std::normal_distribution<double> normal(0.0, 1.0);
    projection.resize(dim * words->dim_w);
    for (auto& p : projection) p = normal(rng);
  }

  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  for (std::size_t i = 0; i < types.size(); ++i) {
    auto out = t.row(i);
    if (words) {
      auto it = words->entries.find(types[i]);
      if (it != words->entries.end()) {
        if (it->second.size() != words->dim_w) throw DimensionError("word vector width mismatch for " + types[i]);
        for (std::size_t r = 0; r < dim; ++r) {
          double s = 0.0;
          const double* p = projection.data() + r * words->dim_w;
          for (std::size_t c = 0; c < words->dim_w; ++c) s += p[c] * it->second[c];
          out[r] = s;
        }
        double norm = detail::l2_norm(out);
        if (norm > 0.0 && std::isfinite(norm)) {
          for (auto& x : out) x /= norm;
          continue;
        }
      }
    }
    Rng rng(derive_seed(seed, "init:" + types[i]));
    std::uniform_real_distribution<double> uni(-bound, bound);
    double norm = 0.0;
    while (norm == 0.0) {
      for (auto& x : out) x = uni(rng);
      norm = detail::l2_norm(out);
    }
    for (auto& x : out) x /= norm;
  }
  return t;
}

// {node} followed by up to `sample_size` distinct neighbours drawn without
// replacement (all of them when the neighbourhood is small enough).
inline std::vector<TypeId> aggregation_set(TypeId node, const GlobalAstGraph& graph, std::size_t sample_size,
                                           Rng& rng, const std::vector<std::size_t>& rank) {
  std::vector<TypeId> nbrs = graph.neighbors(node);
  std::sort(nbrs.begin(), nbrs.end(), [&](TypeId a, TypeId b) { return rank[a] < rank[b]; });
  if (nbrs.size() > sample_size) {
    for (std::size_t i = 0; i < sample_size; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, nbrs.size() - 1);
      std::swap(nbrs[i], nbrs[pick(rng)]);
    }
    nbrs.resize(sample_size);
  }
  std::vector<TypeId> set;
  set.reserve(nbrs.size() + 1);
  set.push_back(node);
  set.insert(set.end(), nbrs.begin(), nbrs.end());
  return set;
}

inline std::vector<double> mean_of(std::span<const TypeId> set, const EmbeddingTable& table) {
  std::vector<double> out(table.dim, 0.0);
  for (TypeId id : set) {
    auto r = table.row(id);
    for (std::size_t d = 0; d < table.dim; ++d) out[d] += r[d];
  }
  const double n = static_cast<double>(set.size());
  for (auto& x : out) x /= n;
  return out;
}

// Mean of the node's own embedding and a uniform sample of its undirected neighbours.
inline std::vector<double> mean_aggregate(TypeId node, const EmbeddingTable& table, const GlobalAstGraph& graph,
                                          std::size_t neighbor_sample_size, std::uint64_t seed) {
  if (node >= graph.vertex_count() || node >= table.size()) throw AlphabetMismatch("vertex out of range");
  Rng rng(derive_seed(derive_seed(seed, "aggregate"), table.names[node]));
  auto rank = detail::name_ranks(graph.types());
  auto set = aggregation_set(node, graph, neighbor_sample_size, rng, rank);
  return mean_of(set, table);
}

// Aggregation sets entering the loss of one positive edge.
struct EdgeTerms {
  std::vector<TypeId> anchor;
  std::vector<TypeId> positive;
  std::vector<std::vector<TypeId>> negatives;
};

// Negative-sampling loss of one edge,
//   -log s(z_u . z_v) - sum_w log s(-z_u . z_w),
// where each z is the mean of its set's rows. If `grad` is non-null it is
// resized to the table shape and receives dLoss/dTable.
inline double edge_loss(const EmbeddingTable& table, const EdgeTerms& terms, std::vector<double>* grad = nullptr) {
  const std::size_t dim = table.dim;
  auto zu = mean_of(terms.anchor, table);
  auto zv = mean_of(terms.positive, table);
  auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t d = 0; d < dim; ++d) s += a[d] * b[d];
    return s;
  };
  const double s_pos = dot(zu, zv);
  double loss = detail::neg_log_sigmoid(s_pos);
  std::vector<std::vector<double>> zw;
  std::vector<double> s_neg;
  for (const auto& set : terms.negatives) {
    zw.push_back(mean_of(set, table));
    s_neg.push_back(dot(zu, zw.back()));
    loss += detail::neg_log_sigmoid(-s_neg.back());
  }
  if (!grad) return loss;

  grad->assign(table.values.size(), 0.0);
  std::vector<double> g_u(dim, 0.0);
  const double c_pos = -(1.0 - detail::sigmoid(s_pos));  // dL/ds_pos
  for (std::size_t d = 0; d < dim; ++d) g_u[d] += c_pos * zv[d];
  auto scatter = [&](const std::vector<TypeId>& set, const std::vector<double>& g_z, double scale) {
    const double w = scale / static_cast<double>(set.size());
    for (TypeId id : set) {
      double* out = grad->data() + static_cast<std::size_t>(id) * dim;
      for (std::size_t d = 0; d < dim; ++d) out[d] += w * g_z[d];
    }
  };
  scatter(terms.positive, zu, c_pos);
  for (std::size_t k = 0; k < zw.size(); ++k) {
    const double c_neg = detail::sigmoid(s_neg[k]);  // dL/ds_neg
    for (std::size_t d = 0; d < dim; ++d) g_u[d] += c_neg * zw[k][d];
    scatter(terms.negatives[k], zu, c_neg);
  }
  scatter(terms.anchor, g_u, 1.0);
  return loss;
}

struct TrainStats {
  std::size_t epochs_run = 0;
  std::size_t edges_seen = 0;
  double last_epoch_loss = 0.0;  // mean edge loss of the final epoch
};

// Unsupervised mean-aggregator training over freshly sampled edges each epoch.
// Every random choice is derived from cfg.seed and type names, so runs are
// bitwise reproducible and equivariant under relabelling of type ids.
inline EmbeddingTable train_unsupervised(const GlobalAstGraph& graph, const EmbeddingTable& init,
                                         const TrainConfig& cfg, TrainStats* stats = nullptr) {
  cfg.validate();
  if (graph.empty()) throw EmptyGraph("cannot train on a graph without edges");
  if (init.size() != graph.vertex_count() || init.names != graph.types())
    throw AlphabetMismatch("embedding table does not cover the graph's alphabet");

  EmbeddingTable table = init;
  if (cfg.epochs == 0) return table;
  table.trained = true;
  table.seed = cfg.seed;

  const auto rank = detail::name_ranks(graph.types());
  std::vector<TypeId> by_name(graph.vertex_count());
  for (std::size_t v = 0; v < by_name.size(); ++v) by_name[rank[v]] = static_cast<TypeId>(v);

  // Canonical, name-ordered edge instances so sampling does not depend on id order.
  std::vector<std::string> ranked_names(graph.vertex_count());
  for (std::size_t v = 0; v < by_name.size(); ++v) ranked_names[v] = graph.types()[by_name[v]];
  GlobalAstGraph ranked(ranked_names);
  for (auto kind : {EdgeKind::Inter, EdgeKind::Intra}) {
    for (const auto& [k, c] : kind == EdgeKind::Inter ? graph.inter_edges() : graph.intra_edges())
      ranked.add_edge(kind, static_cast<TypeId>(rank[k.first]), static_cast<TypeId>(rank[k.second]), c);
  }

  std::vector<double> grad;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::uint64_t epoch_seed = derive_seed(derive_seed(cfg.seed, "train_unsupervised"), epoch);
    EdgeSample sample = sample_edges(ranked, cfg.sample_ratio, epoch_seed);
    double epoch_loss = 0.0;
    for (std::size_t e = 0; e < sample.edges.size(); ++e) {
      Rng rng(derive_seed(epoch_seed, e + 1));
      const TypeId u = by_name[sample.edges[e].src];
      const TypeId v = by_name[sample.edges[e].dst];
      EdgeTerms terms;
      terms.anchor = aggregation_set(u, graph, cfg.neighbor_sample_size, rng, rank);
      terms.positive = aggregation_set(v, graph, cfg.neighbor_sample_size, rng, rank);
      std::vector<TypeId> candidates;
      for (TypeId w : by_name)
        if (w != u && w != v) candidates.push_back(w);
      if (!candidates.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
        for (std::size_t n = 0; n < cfg.negative_samples; ++n) {
          TypeId w = candidates[pick(rng)];
          terms.negatives.push_back(aggregation_set(w, graph, cfg.neighbor_sample_size, rng, rank));
        }
      }
      const double loss = edge_loss(table, terms, &grad);
      if (!std::isfinite(loss))
        throw NonFiniteLoss("edge loss diverged at epoch " + std::to_string(epoch) + ", edge " + std::to_string(e));
      for (std::size_t i = 0; i < grad.size(); ++i) table.values[i] -= cfg.learning_rate * grad[i];
      epoch_loss += loss;
    }
    if (!table.all_finite()) throw NonFiniteLoss("embedding table became non-finite at epoch " + std::to_string(epoch));
    if (stats) {
      stats->epochs_run = epoch + 1;
      stats->edges_seen += sample.edges.size();
      stats->last_epoch_loss = epoch_loss / static_cast<double>(sample.edges.size());
    }
  }
  return table;
}

}  // namespace astro
