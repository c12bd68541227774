#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>

#include "astro/pipeline.hpp"
#include "astro/synthetic.hpp"

using namespace astro;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() / ("astro_pipeline_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
    synthetic::Options opt;
    opt.templates = 15;  // 60 programs
    auto c = synthetic::generate(opt);
    write_corpus(root_ / "corpus.jsonl", c.programs);
    write_pairs(root_ / "pairs.csv", c.pairs, true);
    spec_.functions_path = root_ / "corpus.jsonl";
    spec_.pairs_path = root_ / "pairs.csv";
  }
  void TearDown() override { fs::remove_all(root_); }

  static RunConfig small_config() {
    RunConfig cfg;
    cfg.graph.dim = 32;
    cfg.head.hidden = {32, 16, 8};
    cfg.head.optimizer = Optimizer::Adam;
    cfg.head.batch_size = 16;
    cfg.head.epochs = 30;
    cfg.seed = 5;
    return cfg;
  }

  fs::path root_;
  DatasetSpec spec_;
};

}  // namespace

TEST_F(PipelineTest, EndToEndWritesArtifactsAndReport) {
  auto cfg = small_config();
  auto r = run_pipeline(cfg, spec_, root_ / "run");
  for (const char* f : {"graph.json", "types.emb", "progs.emb", "model.json", "predictions.csv", "report.json",
                        "timings.json"})
    EXPECT_TRUE(fs::exists(root_ / "run" / f)) << f;
  EXPECT_TRUE(std::isfinite(r.metrics.precision));
  EXPECT_TRUE(std::isfinite(r.metrics.f1));
  EXPECT_GE(r.metrics.recall, 0.9);
  auto rep = nlohmann::json::parse(slurp(root_ / "run" / "report.json"));
  EXPECT_EQ(rep["format"], "astro-report/1");
  EXPECT_EQ(rep["dataset"]["programs"], 60);
  EXPECT_EQ(rep["config"]["embedding_mode"], "merged");
  EXPECT_EQ(rep["metrics"]["f1"].get<double>(), r.metrics.f1);
  EXPECT_EQ(rep["fingerprints"]["progs.emb"], file_fingerprint(root_ / "run" / "progs.emb"));
  auto stages = rep["stages"].get<std::vector<std::string>>();
  EXPECT_NE(std::find(stages.begin(), stages.end(), "train_unsupervised"), stages.end());
  EXPECT_NE(std::find(stages.begin(), stages.end(), "merged_embedding"), stages.end());
  EXPECT_EQ(std::find(stages.begin(), stages.end(), "flat_embedding"), stages.end());
  EXPECT_FALSE(rep.contains("timings"));

  auto model = DetectorModel::load(root_ / "run" / "model.json");
  EXPECT_EQ(model.fingerprints.at("progs.emb"), rep["fingerprints"]["progs.emb"]);
  EXPECT_EQ(model.input_dim(), 64u);
  EXPECT_EQ(model.fingerprints.at("alphabet"), sha256_hex(default_alphabet().to_json().dump()));

  std::ifstream preds(root_ / "run" / "predictions.csv");
  std::string header;
  std::getline(preds, header);
  EXPECT_EQ(header, "id_a,id_b,probability,label");
}

TEST_F(PipelineTest, Deterministic) {
  auto cfg = small_config();
  cfg.jobs = 1;
  run_pipeline(cfg, spec_, root_ / "a");
  cfg.jobs = 3;
  run_pipeline(cfg, spec_, root_ / "b");
  for (const char* f : {"report.json", "graph.json", "types.emb", "progs.emb", "model.json", "predictions.csv"})
    EXPECT_EQ(slurp(root_ / "a" / f), slurp(root_ / "b" / f)) << f;
}

TEST_F(PipelineTest, AblationsAreObservable) {
  auto cfg = small_config();
  cfg.head.epochs = 2;
  auto none = run_pipeline(cfg, spec_, root_ / "none").report;
  cfg.ablation = Ablation::NoMerge;
  auto a = run_pipeline(cfg, spec_, root_ / "A").report;
  cfg.ablation = Ablation::NoEdgeSampling;
  auto b = run_pipeline(cfg, spec_, root_ / "B").report;
  cfg.ablation = Ablation::NoGraphLearning;
  auto c = run_pipeline(cfg, spec_, root_ / "C").report;

  EXPECT_EQ(a["config"]["embedding_mode"], "flat");
  EXPECT_NE(a["fingerprints"]["progs.emb"], none["fingerprints"]["progs.emb"]);
  EXPECT_EQ(a["fingerprints"]["types.emb"], none["fingerprints"]["types.emb"]);
  auto a_stages = a["stages"].get<std::vector<std::string>>();
  EXPECT_EQ(std::count(a_stages.begin(), a_stages.end(), "merged_embedding"), 0);
  EXPECT_EQ(std::count(a_stages.begin(), a_stages.end(), "flat_embedding"), 1);

  EXPECT_DOUBLE_EQ(b["config"]["effective_sample_ratio"].get<double>(), 0.10);
  EXPECT_GT(b["graph_training"]["edges_seen"].get<double>(), none["graph_training"]["edges_seen"].get<double>());

  auto c_stages = c["stages"].get<std::vector<std::string>>();
  EXPECT_EQ(std::count(c_stages.begin(), c_stages.end(), "train_unsupervised"), 0);
  EXPECT_TRUE(c["graph_training"].is_null());
  // without training the saved table is the initial one
  auto init = init_embeddings(default_alphabet().types(), nullptr, 32, derive_seed(cfg.seed, "init_embeddings"));
  EXPECT_EQ(slurp(root_ / "C" / "types.emb"), init.to_file().serialize());
}

TEST_F(PipelineTest, ZeroEpochsGivesAllOneClass) {
  auto cfg = small_config();
  cfg.graph.epochs = 0;
  cfg.head.epochs = 0;
  auto r = run_pipeline(cfg, spec_, root_ / "zero");
  EXPECT_EQ(r.metrics.tn + r.metrics.fn, 0u);
  const auto positives = r.metrics.tp, negatives = r.metrics.fp;
  auto expect = Metrics::from_counts(positives, negatives, 0, 0);
  EXPECT_EQ(r.metrics.precision, expect.precision);
  EXPECT_EQ(r.metrics.f1, expect.f1);
  EXPECT_DOUBLE_EQ(r.metrics.recall, 1.0);
}

TEST_F(PipelineTest, UnparseableProgramIsSkipped) {
  {
    std::ofstream out(root_ / "corpus.jsonl", std::ios::app);
    out << R"({"id": "broken", "code": "class { oops"})" << '\n';
  }
  {
    std::ofstream out(root_ / "pairs.csv", std::ios::app);
    out << "broken,t0_v0,0,train\n";
  }
  auto cfg = small_config();
  cfg.head.epochs = 1;
  auto r = run_pipeline(cfg, spec_, root_ / "skip");
  EXPECT_EQ(r.report["dataset"]["skipped"], nlohmann::json::array({"broken"}));
  EXPECT_EQ(r.report["dataset"]["warning_count"], 2);
}

TEST_F(PipelineTest, ConcatModeWithPretrainedFile) {
  std::mt19937_64 rng(3);
  std::normal_distribution<float> g;
  EmbeddingFile pre(768);
  for (const auto& p : read_corpus(root_ / "corpus.jsonl")) {
    std::vector<float> v(768);
    for (auto& x : v) x = g(rng);
    pre.add(p.id, std::span<const float>(v));
  }
  pre.save(root_ / "pre.emb");

  // 50-pair training set, default optimiser and learning rate
  auto pairs = read_pairs(root_ / "pairs.csv");
  std::vector<PairRecord> train;
  std::size_t pos = 0, neg = 0;
  for (auto p : pairs) {
    auto& n = *p.label ? pos : neg;
    if (n == 25) continue;
    ++n;
    p.split = "";
    train.push_back(p);
  }
  ASSERT_EQ(train.size(), 50u);
  write_pairs(root_ / "train50.csv", train, false);
  DatasetSpec spec;
  spec.functions_path = root_ / "corpus.jsonl";
  spec.train_path = root_ / "train50.csv";
  spec.test_path = root_ / "train50.csv";

  RunConfig cfg;
  cfg.input_mode = InputMode::Concat;
  cfg.pretrained_path = root_ / "pre.emb";
  cfg.head.epochs = 5;
  auto r = run_pipeline(cfg, spec, root_ / "concat");
  auto model = DetectorModel::load(root_ / "concat" / "model.json");
  EXPECT_EQ(model.input_dim(), 2048u);
  const auto& hist = r.report["fit"]["history"];
  ASSERT_EQ(hist.size(), 5u);
  double prev = r.report["fit"]["initial_train_loss"].get<double>();
  for (const auto& h : hist) {
    EXPECT_LE(h["train_loss"].get<double>(), prev + 1e-6);
    prev = h["train_loss"].get<double>();
  }

  cfg.pretrained_path.reset();
  EXPECT_THROW(run_pipeline(cfg, spec, root_ / "concat2"), MissingComponent);
}

TEST_F(PipelineTest, StageErrorsNameTheStage) {
  auto cfg = small_config();
  DatasetSpec bad = spec_;
  bad.functions_path = root_ / "missing.jsonl";
  try {
    run_pipeline(cfg, bad, root_ / "bad");
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "ingest");
  }
  cfg.words_path = root_ / "missing.vec";
  try {
    run_pipeline(cfg, spec_, root_ / "bad");
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "init_embeddings");
  }
}

TEST_F(PipelineTest, AblationTable) {
  auto cfg = small_config();
  auto rows = run_ablation(cfg, spec_, root_ / "ablate");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].ablation, Ablation::None);
  EXPECT_EQ(rows[0].recall_diff, 0.0);
  auto md = slurp(root_ / "ablate" / "ablation.md");
  for (const char* label : {"ASTRO (Graph)", "No Merged Embedding (A)", "No Edge Sampling (B)", "No Graph Learning (C)"})
    EXPECT_NE(md.find(label), std::string::npos) << label;
  auto j = nlohmann::json::parse(slurp(root_ / "ablate" / "ablation.json"));
  EXPECT_EQ(j["rows"].size(), 4u);
  const double base = rows[0].metrics.recall;
  ASSERT_GT(base, 0.0);
  for (std::size_t i = 1; i < 4; ++i)
    EXPECT_NEAR(rows[i].recall_diff, 100 * (rows[i].metrics.recall - base) / base, 1e-12);
}

TEST(RunConfig, Parsing) {
  EXPECT_EQ(parse_ablation("A"), Ablation::NoMerge);
  EXPECT_EQ(parse_ablation("C_no_graph_learning"), Ablation::NoGraphLearning);
  EXPECT_EQ(parse_ablation("none"), Ablation::None);
  EXPECT_THROW(parse_ablation("D"), ConfigError);
  EXPECT_THROW(parse_embed_mode("tree"), ConfigError);
  RunConfig c;
  c.threshold = 2;
  EXPECT_THROW(c.validate(), ConfigError);
}
