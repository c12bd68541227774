#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "astro/embedding_io.hpp"
#include "astro/error.hpp"
#include "astro/neural_head.hpp"
#include "astro/rng.hpp"

namespace astro {

struct Program {
  std::string id;
  std::string code;
};

struct PairRecord {
  std::string id_a;
  std::string id_b;
  std::optional<int> label;
  std::string split;  // optional "train" / "val" / "test" column

  bool operator==(const PairRecord&) const = default;
};

// Reads a JSON-lines corpus of {"id": ..., "code": ...}. Duplicate ids keep the
// first occurrence and add a warning.
inline std::vector<Program> read_corpus(std::istream& in, const std::string& name,
                                        std::vector<std::string>* warnings = nullptr) {
  std::vector<Program> programs;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(name, lineno, e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j.contains("code") || !j["code"].is_string())
      throw FormatError(name, lineno, "expected {\"id\": string, \"code\": string}");
    std::string id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
    if (!seen.insert(id).second) {
      if (warnings) warnings->push_back(name + ":" + std::to_string(lineno) + ": duplicate program id '" + id + "'");
      continue;
    }
    programs.push_back({std::move(id), j["code"].get<std::string>()});
  }
  return programs;
}

inline std::vector<Program> read_corpus(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus " + path.string());
  return read_corpus(in, path.string(), warnings);
}

inline void write_corpus(const std::filesystem::path& path, const std::vector<Program>& programs) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& p : programs) out << nlohmann::json{{"id", p.id}, {"code", p.code}}.dump() << '\n';
}

namespace detail {

inline std::string trim_field(std::string s) {
  auto b = s.find_first_not_of(" \t\r\"");
  auto e = s.find_last_not_of(" \t\r\"");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace detail

// Reads `id_a,id_b[,label[,split]]` rows; a leading header row starting with
// "id_a" is skipped. Exact duplicate (id_a, id_b) rows keep the first occurrence.
inline std::vector<PairRecord> read_pairs(std::istream& in, const std::string& name,
                                          std::vector<std::string>* warnings = nullptr, bool require_label = true) {
  std::vector<PairRecord> pairs;
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) cols.push_back(detail::trim_field(field));
    if (lineno == 1 && !cols.empty() && cols[0] == "id_a") continue;
    if (cols.size() < 2 || cols.size() > 4) throw FormatError(name, lineno, "expected id_a,id_b[,label[,split]]");
    PairRecord rec{cols[0], cols[1], std::nullopt, cols.size() == 4 ? cols[3] : ""};
    if (rec.id_a.empty() || rec.id_b.empty()) throw FormatError(name, lineno, "empty program id");
    if (cols.size() >= 3 && !cols[2].empty()) {
      if (cols[2] != "0" && cols[2] != "1") throw FormatError(name, lineno, "label must be 0 or 1, got '" + cols[2] + "'");
      rec.label = cols[2] == "1" ? 1 : 0;
    } else if (require_label) {
      throw FormatError(name, lineno, "missing label");
    }
    if (!rec.split.empty() && rec.split != "train" && rec.split != "val" && rec.split != "test")
      throw FormatError(name, lineno, "split must be train, val or test");
    if (!seen.emplace(rec.id_a, rec.id_b).second) {
      if (warnings)
        warnings->push_back(name + ":" + std::to_string(lineno) + ": duplicate pair (" + rec.id_a + ", " + rec.id_b + ")");
      continue;
    }
    pairs.push_back(std::move(rec));
  }
  return pairs;
}

inline std::vector<PairRecord> read_pairs(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr,
                                          bool require_label = true) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pairs file " + path.string());
  return read_pairs(in, path.string(), warnings, require_label);
}

inline void write_pairs(const std::filesystem::path& path, const std::vector<PairRecord>& pairs, bool with_split) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << (with_split ? "id_a,id_b,label,split\n" : "id_a,id_b,label\n");
  for (const auto& p : pairs) {
    out << p.id_a << ',' << p.id_b << ',' << (p.label ? std::to_string(*p.label) : "");
    if (with_split) out << ',' << p.split;
    out << '\n';
  }
}

struct SplitFractions {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
};

// Where the pairs come from: either one file (split by its split column, or
// else by seeded fractions) or explicit per-split files.
struct DatasetSpec {
  std::filesystem::path functions_path;
  std::optional<std::filesystem::path> pairs_path;
  std::optional<std::filesystem::path> train_path, val_path, test_path;
  SplitFractions fractions;
};

struct Dataset {
  std::vector<Program> programs;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<PairRecord> train, val, test;
  std::vector<std::string> warnings;

  bool has(const std::string& id) const { return index.count(id) != 0; }
};

// Drops pairs whose ids do not resolve in `known`, adding one warning per pair.
template <typename Known>
std::vector<PairRecord> drop_unresolved(std::vector<PairRecord> pairs, const Known& known,
                                        std::vector<std::string>& warnings, const std::string& what) {
  std::vector<PairRecord> kept;
  kept.reserve(pairs.size());
  for (auto& p : pairs) {
    if (!known(p.id_a) || !known(p.id_b)) {
      warnings.push_back("pair (" + p.id_a + ", " + p.id_b + ") references a " + what + " id; dropped");
      continue;
    }
    kept.push_back(std::move(p));
  }
  return kept;
}

inline Dataset ingest(const DatasetSpec& spec, std::uint64_t seed = 0) {
  Dataset ds;
  ds.programs = read_corpus(spec.functions_path, &ds.warnings);
  for (std::size_t i = 0; i < ds.programs.size(); ++i) ds.index.emplace(ds.programs[i].id, i);
  auto known = [&](const std::string& id) { return ds.has(id); };

  if (spec.pairs_path) {
    auto all = drop_unresolved(read_pairs(*spec.pairs_path, &ds.warnings), known, ds.warnings, "missing");
    bool has_split_column = std::any_of(all.begin(), all.end(), [](const PairRecord& p) { return !p.split.empty(); });
    if (has_split_column) {
      for (auto& p : all) {
        if (p.split == "train") ds.train.push_back(p);
        else if (p.split == "val") ds.val.push_back(p);
        else if (p.split == "test") ds.test.push_back(p);
        else ds.warnings.push_back("pair (" + p.id_a + ", " + p.id_b + ") has no split; dropped");
      }
    } else {
      const auto& f = spec.fractions;
      if (f.train <= 0 || f.val < 0 || f.test < 0 || f.train + f.val + f.test > 1.0 + 1e-9)
        throw ConfigError("split fractions must be non-negative, train > 0, and sum to at most 1");
      std::vector<std::size_t> order(all.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      Rng rng(derive_seed(seed, "split"));
      std::shuffle(order.begin(), order.end(), rng);
      const auto n = static_cast<double>(all.size());
      const auto n_train = static_cast<std::size_t>(std::llround(f.train * n));
      const auto n_val = std::min(all.size() - n_train, static_cast<std::size_t>(std::llround(f.val * n)));
      for (std::size_t r = 0; r < order.size(); ++r) {
        auto& p = all[order[r]];
        if (r < n_train) ds.train.push_back(p);
        else if (r < n_train + n_val) ds.val.push_back(p);
        else ds.test.push_back(p);
      }
    }
  } else {
    if (!spec.train_path) throw ConfigError("dataset needs either a pairs file or explicit split files");
    ds.train = drop_unresolved(read_pairs(*spec.train_path, &ds.warnings), known, ds.warnings, "missing");
    if (spec.val_path) ds.val = drop_unresolved(read_pairs(*spec.val_path, &ds.warnings), known, ds.warnings, "missing");
    if (spec.test_path) ds.test = drop_unresolved(read_pairs(*spec.test_path, &ds.warnings), known, ds.warnings, "missing");
  }
  return ds;
}

// Labeled pair features assembled on demand from embedding files.
class PairDataset {
 public:
  PairDataset(std::vector<PairRecord> pairs, const EmbeddingFile* graph, const EmbeddingFile* pretrained,
              InputMode mode, bool require_labels = true)
      : pairs_(std::move(pairs)), graph_(graph), pre_(pretrained), mode_(mode) {
    if (needs_graph(mode_) && !graph_) throw MissingComponent("input mode needs graph embeddings");
    if (needs_pretrained(mode_) && !pre_) throw MissingComponent("input mode needs pretrained embeddings");
    dim_ = (needs_graph(mode_) ? 2 * graph_->dim() : 0) + (needs_pretrained(mode_) ? 2 * pre_->dim() : 0);
    for (const auto& p : pairs_) {
      for (const auto* id : {&p.id_a, &p.id_b}) {
        if (needs_graph(mode_) && !graph_->contains(*id))
          throw MissingComponent("no graph embedding for program '" + *id + "'");
        if (needs_pretrained(mode_) && !pre_->contains(*id))
          throw MissingComponent("no pretrained embedding for program '" + *id + "'");
      }
      if (require_labels && !p.label) throw FormatError("pairs", 0, "pair (" + p.id_a + ", " + p.id_b + ") has no label");
    }
  }

  std::size_t size() const { return pairs_.size(); }
  std::size_t dim() const { return dim_; }
  int label(std::size_t i) const { return pairs_[i].label.value_or(0); }
  const PairRecord& pair(std::size_t i) const { return pairs_[i]; }
  const std::vector<PairRecord>& pairs() const { return pairs_; }
  InputMode mode() const { return mode_; }

  void fill(std::size_t i, std::span<double> out) const {
    const auto& p = pairs_[i];
    OptVec a, b, pa, pb;
    if (needs_graph(mode_)) {
      a = graph_->at(p.id_a);
      b = graph_->at(p.id_b);
    }
    if (needs_pretrained(mode_)) {
      pa = pre_->at(p.id_a);
      pb = pre_->at(p.id_b);
    }
    pair_vector_into(a, b, pa, pb, mode_, out);
  }

 private:
  std::vector<PairRecord> pairs_;
  const EmbeddingFile* graph_;
  const EmbeddingFile* pre_;
  InputMode mode_;
  std::size_t dim_ = 0;
};

}  // namespace astro
