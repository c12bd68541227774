#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "astro/pipeline.hpp"
#include "astro/synthetic.hpp"

namespace fs = std::filesystem;
using namespace astro;

namespace {

std::uint64_t default_seed() {
  if (const char* s = std::getenv("ASTRO_SEED")) {
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      throw ConfigError(std::string("ASTRO_SEED is not an unsigned integer: ") + s);
    }
  }
  return 0;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct HeadOptions {
  std::string optimizer = "sgd";
  std::string mode = "graph_only";

  void add(CLI::App* app, FitConfig& fc) {
    app->add_option("--lr", fc.learning_rate, "detector learning rate");
    app->add_option("--dropout", fc.dropout, "dropout rate");
    app->add_option("--batch", fc.batch_size, "mini-batch size");
    app->add_option("--epochs", fc.epochs, "detector epochs");
    app->add_option("--pos-weight", fc.pos_weight, "weight of the positive class in the loss");
    app->add_option("--optimizer", optimizer, "sgd or adam");
    app->add_option("--hidden", fc.hidden, "hidden layer widths")->delimiter(',');
    app->add_option("--mode", mode, "graph_only, pretrained_only or concat");
    app->add_flag("!--no-standardize", fc.standardize, "feed raw pair vectors to the detector");
  }
};

struct DataOptions {
  std::string corpus, pairs, train, val, test;

  void add(CLI::App* app) {
    app->add_option("--corpus", corpus, "JSON-lines corpus of {id, code}")->required();
    app->add_option("--pairs", pairs, "pairs CSV (split column or seeded fractions)");
    app->add_option("--train", train, "training pairs CSV");
    app->add_option("--val", val, "validation pairs CSV");
    app->add_option("--test", test, "test pairs CSV");
  }

  DatasetSpec spec() const {
    DatasetSpec s;
    s.functions_path = corpus;
    if (!pairs.empty()) s.pairs_path = pairs;
    if (!train.empty()) s.train_path = train;
    if (!val.empty()) s.val_path = val;
    if (!test.empty()) s.test_path = test;
    return s;
  }
};

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

PairDataset load_pairs(const std::string& path, const std::string& graph_emb, const std::string& pre_emb,
                       std::optional<EmbeddingFile>& g, std::optional<EmbeddingFile>& p, InputMode mode,
                       bool require_labels) {
  std::vector<std::string> warnings;
  auto pairs = read_pairs(path, &warnings, require_labels);
  print_warnings(warnings);
  if (!graph_emb.empty()) g = EmbeddingFile::load(graph_emb);
  if (!pre_emb.empty()) p = EmbeddingFile::load(pre_emb);
  return PairDataset(std::move(pairs), g ? &*g : nullptr, p ? &*p : nullptr, mode, require_labels);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"astro: AST subgraph embeddings for code clone detection"};
  app.require_subcommand(1);

  std::string alphabet_path;
  std::size_t jobs = 1;
  std::uint64_t seed = 0;
  app.add_option("--alphabet", alphabet_path, "node-type alphabet JSON (default: built in)");
  app.add_option("--jobs", jobs, "worker threads for parse/embed stages");
  app.add_option("--seed", seed, "top-level seed (default: $ASTRO_SEED or 0)");

  auto alphabet = [&] { return load_alphabet(alphabet_path.empty() ? std::nullopt : std::optional<fs::path>(alphabet_path)); };

  // parse
  auto* parse_cmd = app.add_subcommand("parse", "print the syntax tree or truncated AST of one Java file");
  std::string parse_file;
  std::size_t parse_k = 5;
  bool raw = false;
  parse_cmd->add_option("file", parse_file, "Java source file")->required();
  parse_cmd->add_option("-k", parse_k, "truncation depth");
  parse_cmd->add_flag("--raw", raw, "print the untruncated grammar tree");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "write the synthetic Type-2 clone corpus");
  synthetic::Options synth_opt;
  std::string synth_out;
  synth_cmd->add_option("--out-dir", synth_out, "output directory")->required();
  synth_cmd->add_option("--templates", synth_opt.templates, "number of templates");
  synth_cmd->add_option("--variants", synth_opt.variants, "renamed copies per template");
  synth_cmd->add_option("--negative-ratio", synth_opt.negative_ratio, "non-clone pairs per clone pair");
  synth_cmd->add_flag("--permute", synth_opt.permute_independent, "also reorder independent statements");

  // build-graph
  auto* bg_cmd = app.add_subcommand("build-graph", "count inter/intra edges over a corpus");
  std::string bg_corpus, bg_out;
  std::size_t bg_k = 5;
  bg_cmd->add_option("--corpus", bg_corpus, "JSON-lines corpus")->required();
  bg_cmd->add_option("-k", bg_k, "truncation depth");
  bg_cmd->add_option("--out", bg_out, "graph JSON")->required();

  // train-graph
  auto* tg_cmd = app.add_subcommand("train-graph", "train node-type embeddings on the global graph");
  TrainConfig tc;
  std::string tg_graph, tg_words, tg_out;
  bool tg_no_train = false;
  tg_cmd->add_option("--graph", tg_graph, "graph JSON")->required();
  tg_cmd->add_option("--words", tg_words, "word vectors (text or ASTROEMB)");
  tg_cmd->add_option("--dim", tc.dim, "embedding width");
  tg_cmd->add_option("--ratio", tc.sample_ratio, "edge sample ratio per epoch");
  tg_cmd->add_option("--epochs", tc.epochs, "epochs");
  tg_cmd->add_option("--lr", tc.learning_rate, "learning rate");
  tg_cmd->add_option("--negatives", tc.negative_samples, "negative samples per edge");
  tg_cmd->add_option("--neighbors", tc.neighbor_sample_size, "neighbour sample size");
  tg_cmd->add_flag("--no-train", tg_no_train, "write the initial (projected) table only");
  tg_cmd->add_option("--out", tg_out, "types.emb")->required();

  // embed
  auto* em_cmd = app.add_subcommand("embed", "embed every program of a corpus");
  std::string em_corpus, em_table, em_mode = "merged", em_out;
  std::size_t em_k = 5;
  em_cmd->add_option("--corpus", em_corpus, "JSON-lines corpus")->required();
  em_cmd->add_option("--table", em_table, "types.emb")->required();
  em_cmd->add_option("--mode", em_mode, "merged or flat");
  em_cmd->add_option("-k", em_k, "truncation depth");
  em_cmd->add_option("--out", em_out, "progs.emb")->required();

  // train
  auto* tr_cmd = app.add_subcommand("train", "fit the detection head");
  FitConfig fc;
  HeadOptions tr_head;
  std::string tr_pairs, tr_val, tr_graph_emb, tr_pre_emb, tr_out;
  tr_cmd->add_option("--pairs", tr_pairs, "training pairs CSV")->required();
  tr_cmd->add_option("--val", tr_val, "validation pairs CSV for model selection");
  tr_cmd->add_option("--graph-emb", tr_graph_emb, "program embeddings");
  tr_cmd->add_option("--pre-emb", tr_pre_emb, "pretrained embeddings");
  tr_cmd->add_option("--out", tr_out, "model JSON")->required();
  tr_head.add(tr_cmd, fc);

  // eval / predict
  std::string ev_pairs, ev_model, ev_graph_emb, ev_pre_emb, ev_out;
  double threshold = 0.5;
  auto* ev_cmd = app.add_subcommand("eval", "precision, recall and F1 on labeled pairs");
  auto* pr_cmd = app.add_subcommand("predict", "write id_a,id_b,probability,label");
  for (auto* c : {ev_cmd, pr_cmd}) {
    c->add_option("--pairs", ev_pairs, "pairs CSV")->required();
    c->add_option("--model", ev_model, "model JSON")->required();
    c->add_option("--graph-emb", ev_graph_emb, "program embeddings");
    c->add_option("--pre-emb", ev_pre_emb, "pretrained embeddings");
    c->add_option("--threshold", threshold, "decision threshold");
  }
  pr_cmd->add_option("--out", ev_out, "output CSV (default: stdout)");

  // run / ablate
  RunConfig rc;
  DataOptions data;
  HeadOptions run_head;
  std::string run_out, ablation = "none", words, pre, merge_rule = "self_inclusive";
  auto* run_cmd = app.add_subcommand("run", "end-to-end pipeline with a JSON report");
  auto* ab_cmd = app.add_subcommand("ablate", "run the full model and ablations A, B and C");
  for (auto* c : {run_cmd, ab_cmd}) {
    data.add(c);
    c->add_option("--out-dir", run_out, "artifact directory")->required();
    c->add_option("-k", rc.k, "truncation depth");
    c->add_option("--dim", rc.graph.dim, "type embedding width");
    c->add_option("--ratio", rc.graph.sample_ratio, "edge sample ratio");
    c->add_option("--graph-epochs", rc.graph.epochs, "unsupervised epochs");
    c->add_option("--graph-lr", rc.graph.learning_rate, "unsupervised learning rate");
    c->add_option("--words", words, "word vectors for initialisation");
    c->add_option("--pre-emb", pre, "pretrained embeddings");
    c->add_option("--threshold", rc.threshold, "decision threshold");
    c->add_option("--merge-rule", merge_rule, "self_inclusive or children_only");
    run_head.add(c, rc.head);
  }
  run_cmd->add_option("--ablation", ablation, "none, A_no_merge, B_no_edge_sampling or C_no_graph_learning");

  try {
    seed = default_seed();
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*parse_cmd) {
      auto src = slurp(parse_file);
      if (raw) {
        std::string out;
        dump_syntax(java::parse_java(src), out);
        std::cout << out;
      } else {
        auto a = alphabet();
        auto t = parse_truncated(src, a, parse_k, parse_file);
        std::string out;
        auto print = [&](auto&& self, const AstNode& n) -> void {
          out.append(n.depth * 2, ' ');
          out += a.name(n.type_id);
          out += '\n';
          for (const auto& c : n.children) self(self, c);
        };
        print(print, t.root);
        std::cout << out;
      }
    } else if (*synth_cmd) {
      synth_opt.seed = seed;
      auto corpus = synthetic::generate(synth_opt);
      fs::create_directories(synth_out);
      write_corpus(fs::path(synth_out) / "corpus.jsonl", corpus.programs);
      write_pairs(fs::path(synth_out) / "pairs.csv", corpus.pairs, true);
      std::cout << corpus.programs.size() << " programs, " << corpus.pairs.size() << " pairs\n";
    } else if (*bg_cmd) {
      std::vector<std::string> warnings;
      auto programs = read_corpus(bg_corpus, &warnings);
      auto parsed = parse_programs(programs, alphabet(), bg_k, jobs);
      warnings.insert(warnings.end(), parsed.warnings.begin(), parsed.warnings.end());
      print_warnings(warnings);
      auto g = build_graph(parsed.trees, alphabet());
      g.save(bg_out);
      std::cout << g.total_inter() << " inter edges, " << g.total_intra() << " intra edges\n";
    } else if (*tg_cmd) {
      auto g = GlobalAstGraph::load(tg_graph);
      std::optional<WordVectorFile> w;
      if (!tg_words.empty()) w = WordVectorFile::load(tg_words);
      auto table = init_embeddings(g.types(), w ? &*w : nullptr, tc.dim, derive_seed(seed, "init_embeddings"));
      if (!tg_no_train) {
        tc.seed = derive_seed(seed, "train_unsupervised");
        TrainStats stats;
        table = train_unsupervised(g, table, tc, &stats);
        std::cout << stats.edges_seen << " edge updates, final epoch loss " << stats.last_epoch_loss << '\n';
      }
      table.to_file().save(tg_out);
    } else if (*em_cmd) {
      std::vector<std::string> warnings;
      auto programs = read_corpus(em_corpus, &warnings);
      auto parsed = parse_programs(programs, alphabet(), em_k, jobs);
      warnings.insert(warnings.end(), parsed.warnings.begin(), parsed.warnings.end());
      print_warnings(warnings);
      auto table = EmbeddingTable::from_file(EmbeddingFile::load(em_table), alphabet().types());
      auto f = embed_programs(parsed.trees, table, parse_embed_mode(em_mode), MergeRule::SelfInclusive, jobs);
      f.save(em_out);
      std::cout << f.size() << " program embeddings\n";
    } else if (*tr_cmd) {
      fc.optimizer = parse_optimizer(tr_head.optimizer);
      fc.seed = derive_seed(seed, "fit");
      auto mode = parse_input_mode(tr_head.mode);
      std::optional<EmbeddingFile> g, p;
      auto train = load_pairs(tr_pairs, tr_graph_emb, tr_pre_emb, g, p, mode, true);
      std::optional<PairDataset> val;
      if (!tr_val.empty()) {
        auto pairs = read_pairs(tr_val);
        val.emplace(std::move(pairs), g ? &*g : nullptr, p ? &*p : nullptr, mode);
      }
      auto r = fit(train, val ? &*val : nullptr, fc, mode);
      if (!tr_graph_emb.empty()) r.model.fingerprints["graph_emb"] = file_fingerprint(tr_graph_emb);
      if (!tr_pre_emb.empty()) r.model.fingerprints["pre_emb"] = file_fingerprint(tr_pre_emb);
      r.model.save(tr_out);
      std::cout << "best epoch " << r.best_epoch << ", train loss "
                << (r.history.empty() ? r.initial_train_loss : r.history.back().train_loss) << '\n';
    } else if (*ev_cmd || *pr_cmd) {
      auto model = DetectorModel::load(ev_model);
      std::optional<EmbeddingFile> g, p;
      auto data = load_pairs(ev_pairs, ev_graph_emb, ev_pre_emb, g, p, model.input_mode, bool(*ev_cmd));
      if (data.dim() != model.input_dim())
        throw DimMismatch("pair vectors have " + std::to_string(data.dim()) + " components, model expects " +
                          std::to_string(model.input_dim()));
      if (*ev_cmd) {
        std::cout << evaluate(model, data, threshold).to_json().dump(2) << '\n';
      } else {
        auto probs = predict(model, data);
        fs::path out = ev_out.empty() ? fs::path("/dev/stdout") : fs::path(ev_out);
        write_predictions(out, data.pairs(), probs, threshold);
      }
    } else if (*run_cmd || *ab_cmd) {
      rc.seed = seed;
      rc.jobs = jobs;
      rc.head.optimizer = parse_optimizer(run_head.optimizer);
      rc.input_mode = parse_input_mode(run_head.mode);
      rc.merge_rule = merge_rule == "children_only" ? MergeRule::ChildrenOnly : MergeRule::SelfInclusive;
      if (merge_rule != "children_only" && merge_rule != "self_inclusive")
        throw ConfigError("unknown merge rule '" + merge_rule + "'");
      if (!alphabet_path.empty()) rc.alphabet_path = alphabet_path;
      if (!words.empty()) rc.words_path = words;
      if (!pre.empty()) rc.pretrained_path = pre;
      if (*run_cmd) {
        rc.ablation = parse_ablation(ablation);
        auto r = run_pipeline(rc, data.spec(), run_out);
        print_warnings(r.report["dataset"]["warnings"].get<std::vector<std::string>>());
        std::cout << r.metrics.to_json().dump(2) << '\n';
      } else {
        auto rows = run_ablation(rc, data.spec(), run_out);
        std::cout << ablation_markdown(rows);
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
