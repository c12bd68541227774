#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "astro/alphabet.hpp"
#include "astro/dataset.hpp"
#include "astro/embedding_io.hpp"
#include "astro/error.hpp"
#include "astro/fingerprint.hpp"
#include "astro/frontend.hpp"
#include "astro/global_graph.hpp"
#include "astro/graph_learning.hpp"
#include "astro/neural_head.hpp"
#include "astro/parallel.hpp"
#include "astro/subgraph_embed.hpp"

namespace astro {

inline constexpr std::string_view kReportFormat = "astro-report/1";
inline constexpr double kAblationBSampleRatio = 0.10;

enum class Ablation { None, NoMerge, NoEdgeSampling, NoGraphLearning };

inline std::string_view to_string(Ablation a) {
  switch (a) {
    case Ablation::None: return "none";
    case Ablation::NoMerge: return "A_no_merge";
    case Ablation::NoEdgeSampling: return "B_no_edge_sampling";
    case Ablation::NoGraphLearning: return "C_no_graph_learning";
  }
  return "none";
}

inline Ablation parse_ablation(std::string_view s) {
  for (auto a : {Ablation::None, Ablation::NoMerge, Ablation::NoEdgeSampling, Ablation::NoGraphLearning})
    if (s == to_string(a) || (s.size() == 1 && s[0] == to_string(a)[0])) return a;
  throw ConfigError("unknown ablation '" + std::string(s) + "'");
}

inline std::string_view ablation_label(Ablation a) {
  switch (a) {
    case Ablation::None: return "ASTRO (Graph)";
    case Ablation::NoMerge: return "No Merged Embedding (A)";
    case Ablation::NoEdgeSampling: return "No Edge Sampling (B)";
    case Ablation::NoGraphLearning: return "No Graph Learning (C)";
  }
  return "";
}

enum class EmbedMode { Merged, Flat };

inline std::string_view to_string(EmbedMode m) { return m == EmbedMode::Flat ? "flat" : "merged"; }

inline EmbedMode parse_embed_mode(std::string_view s) {
  if (s == "merged") return EmbedMode::Merged;
  if (s == "flat") return EmbedMode::Flat;
  throw ConfigError("unknown embedding mode '" + std::string(s) + "' (expected merged or flat)");
}

struct RunConfig {
  std::size_t k = 5;
  TrainConfig graph;  // dim, sample_ratio and the unsupervised schedule
  FitConfig head;
  InputMode input_mode = InputMode::GraphOnly;
  Ablation ablation = Ablation::None;
  MergeRule merge_rule = MergeRule::SelfInclusive;
  double threshold = 0.5;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::optional<std::filesystem::path> alphabet_path;
  std::optional<std::filesystem::path> words_path;
  std::optional<std::filesystem::path> pretrained_path;

  double effective_sample_ratio() const {
    return ablation == Ablation::NoEdgeSampling ? kAblationBSampleRatio : graph.sample_ratio;
  }
  EmbedMode embed_mode() const { return ablation == Ablation::NoMerge ? EmbedMode::Flat : EmbedMode::Merged; }

  void validate() const {
    if (k < 1) throw ConfigError("k must be at least 1");
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("threshold must lie in [0,1]");
    graph.validate();
    head.validate();
  }

  // Paths and the worker count are left out so reports compare across machines.
  nlohmann::json to_json() const {
    return {{"k", k},
            {"dim", graph.dim},
            {"sample_ratio", graph.sample_ratio},
            {"effective_sample_ratio", effective_sample_ratio()},
            {"graph_epochs", graph.epochs},
            {"graph_learning_rate", graph.learning_rate},
            {"negative_samples", graph.negative_samples},
            {"neighbor_sample_size", graph.neighbor_sample_size},
            {"head", head.to_json()},
            {"input_mode", std::string(to_string(input_mode))},
            {"ablation", std::string(to_string(ablation))},
            {"embedding_mode", std::string(to_string(embed_mode()))},
            {"merge_rule", merge_rule == MergeRule::SelfInclusive ? "self_inclusive" : "children_only"},
            {"threshold", threshold},
            {"seed", seed},
            {"word_vectors", words_path.has_value()},
            {"pretrained", pretrained_path.has_value()}};
  }
};

inline NodeTypeAlphabet load_alphabet(const std::optional<std::filesystem::path>& path) {
  return path ? NodeTypeAlphabet::load(*path) : default_alphabet();
}

struct ParsedCorpus {
  std::vector<TruncatedAst> trees;  // ordered by program id
  std::vector<std::string> skipped;
  std::vector<std::string> warnings;

  std::map<std::string, const TruncatedAst*> by_id() const {
    std::map<std::string, const TruncatedAst*> m;
    for (const auto& t : trees) m.emplace(t.source_id, &t);
    return m;
  }
};

// Parses and truncates every program. Unparseable programs are skipped with a
// warning rather than aborting the run.
inline ParsedCorpus parse_programs(const std::vector<Program>& programs, const NodeTypeAlphabet& alphabet,
                                   std::size_t k, std::size_t jobs = 1) {
  if (k < 1) throw ConfigError("k must be at least 1");
  std::vector<std::optional<TruncatedAst>> slots(programs.size());
  std::vector<std::string> errors(programs.size());
  parallel_for(programs.size(), jobs, [&](std::size_t i) {
    try {
      slots[i] = parse_truncated(programs[i].code, alphabet, k, programs[i].id);
    } catch (const ParseError& e) {
      errors[i] = e.what();
    }
  });
  std::vector<std::size_t> order(programs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return programs[a].id < programs[b].id; });
  ParsedCorpus out;
  for (auto i : order) {
    if (slots[i]) {
      out.trees.push_back(std::move(*slots[i]));
    } else {
      out.skipped.push_back(programs[i].id);
      out.warnings.push_back("program '" + programs[i].id + "' does not parse: " + errors[i]);
    }
  }
  return out;
}

inline EmbeddingFile embed_programs(const std::vector<TruncatedAst>& trees, const EmbeddingTable& table,
                                    EmbedMode mode, MergeRule rule = MergeRule::SelfInclusive, std::size_t jobs = 1) {
  std::vector<SubgraphEmbedding> out(trees.size());
  parallel_for(trees.size(), jobs, [&](std::size_t i) {
    out[i] = mode == EmbedMode::Flat ? flat_embedding(trees[i], table) : merged_embedding(trees[i], table, rule);
  });
  EmbeddingFile f(static_cast<std::uint32_t>(table.dim));
  for (auto& e : out) f.add(e.source_id, std::span<const double>(e.vector));
  return f;
}

inline void write_predictions(const std::filesystem::path& path, const std::vector<PairRecord>& pairs,
                              const std::vector<double>& probs, double threshold) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "id_a,id_b,probability,label\n";
  char buf[32];
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.9g", probs[i]);
    out << pairs[i].id_a << ',' << pairs[i].id_b << ',' << buf << ',' << (probs[i] >= threshold ? 1 : 0) << '\n';
  }
}

struct RunResult {
  Metrics metrics;
  nlohmann::json report;
  std::map<std::string, double> timings;  // seconds per stage
};

namespace detail {

class StageClock {
 public:
  template <typename Fn>
  auto run(const std::string& stage, Fn&& fn) -> decltype(fn()) {
    auto t0 = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        record(stage, t0);
      } else {
        auto r = fn();
        record(stage, t0);
        return r;
      }
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(stage, e.what());
    }
  }

  std::vector<std::string> audit;
  std::map<std::string, double> seconds;

 private:
  void record(const std::string& stage, std::chrono::steady_clock::time_point t0) {
    audit.push_back(stage);
    seconds[stage] += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace detail

// End-to-end run. Artifacts land in out_dir: graph.json, types.emb, progs.emb,
// model.json, predictions.csv, report.json and timings.json. The report holds
// no wall-clock data, so identical inputs give byte-identical reports.
inline RunResult run_pipeline(const RunConfig& cfg, const DatasetSpec& spec, const std::filesystem::path& out_dir) {
  cfg.validate();
  if (needs_pretrained(cfg.input_mode) && !cfg.pretrained_path)
    throw MissingComponent("input mode " + std::string(to_string(cfg.input_mode)) + " needs a pretrained embedding file");
  std::filesystem::create_directories(out_dir);
  detail::StageClock clock;

  auto alphabet = clock.run("load_alphabet", [&] { return load_alphabet(cfg.alphabet_path); });
  Dataset ds = clock.run("ingest", [&] { return ingest(spec, derive_seed(cfg.seed, "ingest")); });

  // Only programs referenced by some pair are processed.
  std::set<std::string> used;
  for (const auto* split : {&ds.train, &ds.val, &ds.test})
    for (const auto& p : *split) used.insert({p.id_a, p.id_b});
  std::vector<Program> programs;
  for (const auto& p : ds.programs)
    if (used.count(p.id)) programs.push_back(p);

  auto parsed = clock.run("parse_truncate", [&] { return parse_programs(programs, alphabet, cfg.k, cfg.jobs); });
  ds.warnings.insert(ds.warnings.end(), parsed.warnings.begin(), parsed.warnings.end());
  std::set<std::string> ok;
  for (const auto& t : parsed.trees) ok.insert(t.source_id);
  auto parsed_ok = [&](const std::string& id) { return ok.count(id) != 0; };
  ds.train = drop_unresolved(std::move(ds.train), parsed_ok, ds.warnings, "unparseable");
  ds.val = drop_unresolved(std::move(ds.val), parsed_ok, ds.warnings, "unparseable");
  ds.test = drop_unresolved(std::move(ds.test), parsed_ok, ds.warnings, "unparseable");

  auto graph = clock.run("build_graph", [&] {
    std::set<std::string> train_ids;
    for (const auto& p : ds.train) train_ids.insert({p.id_a, p.id_b});
    std::vector<TruncatedAst> train_trees;
    for (const auto& t : parsed.trees)
      if (train_ids.count(t.source_id)) train_trees.push_back(t);
    auto g = build_graph(train_trees, alphabet);
    g.save(out_dir / "graph.json");
    return g;
  });

  auto table = clock.run("init_embeddings", [&] {
    std::optional<WordVectorFile> words;
    if (cfg.words_path) words = WordVectorFile::load(*cfg.words_path);
    return init_embeddings(alphabet.types(), words ? &*words : nullptr, cfg.graph.dim,
                           derive_seed(cfg.seed, "init_embeddings"));
  });

  TrainStats graph_stats;
  if (cfg.ablation != Ablation::NoGraphLearning) {
    table = clock.run("train_unsupervised", [&] {
      TrainConfig tc = cfg.graph;
      tc.sample_ratio = cfg.effective_sample_ratio();
      tc.seed = derive_seed(cfg.seed, "train_unsupervised");
      return train_unsupervised(graph, table, tc, &graph_stats);
    });
  }

  // The table goes through the f32 interchange file, as with the split CLI verbs.
  table = clock.run("save_types", [&] {
    table.to_file().save(out_dir / "types.emb");
    return EmbeddingTable::from_file(EmbeddingFile::load(out_dir / "types.emb"), alphabet.types());
  });

  const EmbedMode embed_mode = cfg.embed_mode();
  auto progs = clock.run(embed_mode == EmbedMode::Flat ? "flat_embedding" : "merged_embedding", [&] {
    auto f = embed_programs(parsed.trees, table, embed_mode, cfg.merge_rule, cfg.jobs);
    f.save(out_dir / "progs.emb");
    return EmbeddingFile::load(out_dir / "progs.emb");
  });

  std::optional<EmbeddingFile> pre;
  if (needs_pretrained(cfg.input_mode))
    pre = clock.run("load_pretrained", [&] { return EmbeddingFile::load(*cfg.pretrained_path); });
  const EmbeddingFile* pre_ptr = pre ? &*pre : nullptr;

  PairDataset train(ds.train, &progs, pre_ptr, cfg.input_mode);
  PairDataset val(ds.val, &progs, pre_ptr, cfg.input_mode);
  PairDataset test(ds.test, &progs, pre_ptr, cfg.input_mode);

  auto fitted = clock.run("fit", [&] {
    FitConfig fc = cfg.head;
    fc.seed = derive_seed(cfg.seed, "fit");
    auto r = fit(train, val.size() ? &val : nullptr, fc, cfg.input_mode);
    r.model.fingerprints["alphabet"] = sha256_hex(alphabet.to_json().dump());
    r.model.fingerprints["types.emb"] = file_fingerprint(out_dir / "types.emb");
    r.model.fingerprints["progs.emb"] = file_fingerprint(out_dir / "progs.emb");
    r.model.save(out_dir / "model.json");
    return r;
  });

  RunResult result;
  std::optional<Metrics> val_metrics;
  clock.run("evaluate", [&] {
    auto probs = predict(fitted.model, test);
    std::vector<int> labels(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) labels[i] = test.label(i);
    result.metrics = score(probs, labels, cfg.threshold);
    if (val.size()) val_metrics = evaluate(fitted.model, val, cfg.threshold);
    write_predictions(out_dir / "predictions.csv", ds.test, probs, cfg.threshold);
  });

  nlohmann::json& rep = result.report;
  rep["format"] = kReportFormat;
  rep["config"] = cfg.to_json();
  rep["dataset"] = {{"programs", ds.programs.size()},
                    {"programs_used", programs.size()},
                    {"parsed", parsed.trees.size()},
                    {"skipped", parsed.skipped},
                    {"train_pairs", ds.train.size()},
                    {"val_pairs", ds.val.size()},
                    {"test_pairs", ds.test.size()},
                    {"warning_count", ds.warnings.size()},
                    {"warnings", ds.warnings}};
  rep["stages"] = clock.audit;
  rep["graph"] = {{"types", graph.vertex_count()},
                  {"total_inter", graph.total_inter()},
                  {"total_intra", graph.total_intra()},
                  {"distinct_inter", graph.inter_edges().size()},
                  {"distinct_intra", graph.intra_edges().size()}};
  if (cfg.ablation == Ablation::NoGraphLearning) {
    rep["graph_training"] = nullptr;
  } else {
    rep["graph_training"] = {{"epochs_run", graph_stats.epochs_run},
                             {"edges_seen", graph_stats.edges_seen},
                             {"last_epoch_loss", graph_stats.last_epoch_loss}};
  }
  nlohmann::json history = nlohmann::json::array();
  for (const auto& h : fitted.history) {
    nlohmann::json e = {{"train_loss", h.train_loss}};
    e["val_f1"] = h.val_f1 ? nlohmann::json(*h.val_f1) : nlohmann::json(nullptr);
    history.push_back(e);
  }
  rep["fit"] = {{"initial_train_loss", fitted.initial_train_loss}, {"best_epoch", fitted.best_epoch},
                {"history", history}};
  rep["metrics"] = result.metrics.to_json();
  rep["val_metrics"] = val_metrics ? val_metrics->to_json() : nlohmann::json(nullptr);
  nlohmann::json fps;
  for (const char* name : {"graph.json", "types.emb", "progs.emb", "model.json", "predictions.csv"})
    fps[name] = file_fingerprint(out_dir / name);
  rep["fingerprints"] = fps;
  detail::write_json(out_dir / "report.json", rep);

  result.timings = clock.seconds;
  detail::write_json(out_dir / "timings.json", nlohmann::json(clock.seconds));
  return result;
}

struct AblationRow {
  Ablation ablation;
  Metrics metrics;
  double recall_diff = 0.0;  // relative to the full model, in percent
};

inline std::string ablation_markdown(const std::vector<AblationRow>& rows) {
  std::ostringstream s;
  char buf[160];
  s << "| Approaches | Precision | Recall | F1 | Recall Diff |\n|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    std::string diff = "-";
    if (r.ablation != Ablation::None) {
      std::snprintf(buf, sizeof buf, "%+.1f%%", r.recall_diff);
      diff = buf;
    }
    std::snprintf(buf, sizeof buf, "| %s | %.2f | %.2f | %.2f | %s |\n", std::string(ablation_label(r.ablation)).c_str(),
                  r.metrics.precision, r.metrics.recall, r.metrics.f1, diff.c_str());
    s << buf;
  }
  return s.str();
}

// Runs the full model and the three ablations into out_dir/<ablation>/ and
// writes ablation.md / ablation.json comparing them.
inline std::vector<AblationRow> run_ablation(RunConfig cfg, const DatasetSpec& spec, const std::filesystem::path& out_dir) {
  std::vector<AblationRow> rows;
  for (auto a : {Ablation::None, Ablation::NoMerge, Ablation::NoEdgeSampling, Ablation::NoGraphLearning}) {
    cfg.ablation = a;
    auto r = run_pipeline(cfg, spec, out_dir / std::string(to_string(a)));
    rows.push_back({a, r.metrics, 0.0});
  }
  const double base = rows.front().metrics.recall;
  for (auto& r : rows) r.recall_diff = base > 0.0 ? 100.0 * (r.metrics.recall - base) / base : 0.0;

  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows) {
    auto m = r.metrics.to_json();
    m["ablation"] = std::string(to_string(r.ablation));
    m["approach"] = std::string(ablation_label(r.ablation));
    m["recall_diff_percent"] = r.recall_diff;
    j.push_back(m);
  }
  detail::write_json(out_dir / "ablation.json", {{"format", "astro-ablation/1"}, {"rows", j}});
  std::ofstream(out_dir / "ablation.md") << ablation_markdown(rows);
  return rows;
}

}  // namespace astro
