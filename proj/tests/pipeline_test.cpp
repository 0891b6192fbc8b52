#include "oovt/pipeline.hpp"

#include <gtest/gtest.h>

#include <set>

#include "oovt/toy.hpp"
#include "test_util.hpp"

namespace oovt {
namespace {

using testing_util::slurp;
using testing_util::TempDir;
namespace fs = std::filesystem;

PipelineConfig fast_config(const TempDir& dir) {
  const auto paths = toy::write_fixture(dir / "toy");
  auto cfg = PipelineConfig::load(paths.config);
  cfg.out_dir = dir / "out";
  cfg.embeddings.dim = 16;
  cfg.embeddings.epochs = 2;
  cfg.embeddings.bucket_count = 2048;
  cfg.seq2seq.hidden_size = 16;
  cfg.seq2seq.char_emb_size = 8;
  cfg.seq2seq.max_epochs = 2;
  return cfg;
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files[fs::relative(e.path(), root).generic_string()] = slurp(e.path());
  return files;
}

TEST(ConfigTest, ResolvesPathsAgainstConfigDirectory) {
  TempDir dir;
  auto cfg = PipelineConfig::load(dir.write("c.json", R"({"lexicon": "lex.tsv", "monolingual": "/abs/mono.txt"})"));
  EXPECT_EQ(cfg.lexicon, dir / "lex.tsv");
  EXPECT_EQ(cfg.monolingual, fs::path("/abs/mono.txt"));
  EXPECT_EQ(cfg.n_total, 1000u);
  EXPECT_EQ(cfg.n_validation, 500u);
}

TEST(ConfigTest, TopLevelSeedFeedsEveryComponent) {
  auto cfg = PipelineConfig::from_json(nlohmann::json::parse(R"({"seed": 9, "embeddings": {"seed": 4}})"));
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.embeddings.seed, 4u);
  EXPECT_EQ(cfg.seq2seq.seed, 9u);
}

TEST(ConfigTest, PaperPresetThenOverrides) {
  auto cfg = PipelineConfig::from_json(
      nlohmann::json::parse(R"({"seed": 3, "seq2seq": {"preset": "paper", "hidden_size": 256}})"));
  EXPECT_EQ(cfg.seq2seq.enc_layers, 3);
  EXPECT_EQ(cfg.seq2seq.batch_size, 128);
  EXPECT_EQ(cfg.seq2seq.hidden_size, 256);
  EXPECT_EQ(cfg.seq2seq.seed, 3u);
}

TEST(ConfigTest, FlagsWin) {
  auto cfg = PipelineConfig::from_json(nlohmann::json::parse(R"({"seed": 3, "out_dir": "a", "methods": ["edit"]})"));
  apply_overrides(cfg, {7, fs::path("b"), std::vector{Method::Seq2Seq}});
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.embeddings.seed, 7u);
  EXPECT_EQ(cfg.seq2seq.seed, 7u);
  EXPECT_EQ(cfg.out_dir, fs::path("b"));
  EXPECT_EQ(cfg.methods, std::vector{Method::Seq2Seq});
}

TEST(ConfigTest, RejectsUnknownKeysAndBadValues) {
  auto parse = [](const char* s) { return PipelineConfig::from_json(nlohmann::json::parse(s)); };
  EXPECT_THROW(parse(R"({"lexcon": "x"})"), UsageError);
  EXPECT_THROW(parse(R"({"dataset": {"n_totl": 3}})"), UsageError);
  EXPECT_THROW(parse(R"({"dataset": {"n_total": "many"}})"), UsageError);
  EXPECT_THROW(parse(R"({"methods": ["edit", "lookup"]})"), UsageError);
  EXPECT_THROW(parse(R"({"seq2seq": {"preset": "huge"}})"), UsageError);
  EXPECT_THROW(parse(R"({"dataset": {"n_total": 10, "n_validation": 11}})").validate(), UsageError);
  TempDir dir;
  EXPECT_THROW(PipelineConfig::load(dir.write("bad.json", "{ not json")), UsageError);
}

TEST(ConfigTest, UnknownMethodListsChoices) {
  try {
    parse_method("lookup");
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("{edit, vector, seq2seq}"), std::string::npos);
  }
}

TEST(ConfigTest, JsonRoundTrip) {
  TempDir dir;
  auto cfg = fast_config(dir);
  auto again = PipelineConfig::from_json(cfg.to_json());
  EXPECT_EQ(again.to_json(), cfg.to_json());
}

TEST(BuildDatasetTest, CensorsEverySplitWord) {
  TempDir dir;
  auto cfg = fast_config(dir);
  const auto split = run_build_dataset(cfg);
  EXPECT_EQ(split.validation.size(), 60u);
  EXPECT_EQ(split.test.size(), 60u);

  const OutputLayout out{cfg.out_dir};
  const auto words = split.source_words();
  for (const auto& e : load_translation_table(out.censored_table()).entries) EXPECT_FALSE(words.count(e.source_word));
  const auto censored = load_parallel(cfg.parallel_source, cfg.parallel_target, out.censored_alignment());
  for (const auto& c : extract_oov_candidates(censored, load_lexicon(cfg.lexicon)))
    EXPECT_FALSE(words.count(c.source_word)) << c.source_word;
  EXPECT_EQ(load_split_file(out.split("test")), split.test);
}

TEST(BuildDatasetTest, RerunIsByteIdentical) {
  TempDir dir;
  auto cfg = fast_config(dir);
  run_build_dataset(cfg);
  const auto first = snapshot(cfg.out_dir);
  run_build_dataset(cfg);
  EXPECT_EQ(snapshot(cfg.out_dir), first);
  EXPECT_TRUE(first.count("manifest.json"));
}

TEST(BuildDatasetTest, MissingParallelFileFailsBeforeWriting) {
  TempDir dir;
  auto cfg = fast_config(dir);
  cfg.parallel_target = dir / "nope.tgt";
  EXPECT_THROW(run_build_dataset(cfg), DataError);
  EXPECT_FALSE(fs::exists(cfg.out_dir));
}

TEST(BuildDatasetTest, AlignsWithIbm1WhenNoAlignmentGiven) {
  TempDir dir;
  auto cfg = fast_config(dir);
  cfg.parallel_alignment.clear();
  log::Capture cap;
  const auto split = run_build_dataset(cfg);
  EXPECT_TRUE(cap.contains(log::Level::Info, "IBM Model 1"));
  EXPECT_FALSE(split.test.empty());
}

TEST(TranslateTest, EditGivesOnePredictionPerTestEntryInOrder) {
  TempDir dir;
  auto cfg = fast_config(dir);
  const auto split = run_build_dataset(cfg);
  const auto preds = run_translate(cfg, Method::Edit);
  ASSERT_EQ(preds.size(), split.test.size());
  for (std::size_t i = 0; i < preds.size(); ++i) EXPECT_EQ(preds[i].oov, split.test[i].source_word);
  EXPECT_EQ(load_predictions(OutputLayout{cfg.out_dir}.predictions(Method::Edit)), preds);
  EXPECT_EQ(run_translate(cfg, Method::Edit, "validation").size(), split.validation.size());
  EXPECT_THROW(run_translate(cfg, Method::Edit, "train"), UsageError);
}

TEST(TranslateTest, TrainsMissingModelsOnDemand) {
  TempDir dir;
  auto cfg = fast_config(dir);
  run_build_dataset(cfg);
  const OutputLayout out{cfg.out_dir};
  ASSERT_FALSE(fs::exists(out.seq2seq()));
  EXPECT_EQ(run_translate(cfg, Method::Seq2Seq).size(), 60u);
  EXPECT_TRUE(fs::exists(out.seq2seq()));
  EXPECT_TRUE(fs::exists(out.seq2seq_log()));
  EXPECT_EQ(run_translate(cfg, Method::Vector).size(), 60u);
  EXPECT_TRUE(fs::exists(out.embeddings()));
}

TEST(TranslateTest, RequiresDataset) {
  TempDir dir;
  auto cfg = fast_config(dir);
  EXPECT_THROW(run_translate(cfg, Method::Edit), DataError);
}

TEST(EvaluateTest, ReportsComparisonAndStratifiedGrid) {
  TempDir dir;
  auto cfg = fast_config(dir);
  cfg.methods = {Method::Edit};
  run_build_dataset(cfg);
  run_translate(cfg, Method::Edit);
  const auto ev = run_evaluate(cfg);
  ASSERT_TRUE(ev.reports.count("edit"));
  EXPECT_EQ(ev.reports.at("edit").n, 60u);
  ASSERT_TRUE(ev.stratified.count("edit"));
  std::size_t annotated = 0;
  for (const auto& [c, row] : ev.stratified.at("edit").per_category) annotated += row.count;
  EXPECT_EQ(annotated, 60u);
  const OutputLayout out{cfg.out_dir};
  const auto j = nlohmann::json::parse(slurp(out.report_json()));
  EXPECT_TRUE(j.contains("stratified"));
  EXPECT_GT(j["random_baseline_accuracy"].get<double>(), 0.0);
  const auto txt = slurp(out.report_text());
  EXPECT_NE(txt.find("OOV Category"), std::string::npos);
  EXPECT_NE(txt.find("*"), std::string::npos);
}

TEST(EvaluateTest, NoAnnotationsNoGrid) {
  TempDir dir;
  auto cfg = fast_config(dir);
  cfg.methods = {Method::Edit};
  cfg.categories.clear();
  run_build_dataset(cfg);
  run_translate(cfg, Method::Edit);
  EXPECT_TRUE(run_evaluate(cfg).stratified.empty());
  EXPECT_EQ(slurp(OutputLayout{cfg.out_dir}.report_text()).find("OOV Category"), std::string::npos);
}

TEST(EvaluateTest, MissingGoldOovIsNamed) {
  TempDir dir;
  auto cfg = fast_config(dir);
  cfg.methods = {Method::Edit};
  run_build_dataset(cfg);
  auto preds = run_translate(cfg, Method::Edit);
  const std::string dropped = preds.back().oov;
  preds.pop_back();
  write_predictions(preds, OutputLayout{cfg.out_dir}.predictions(Method::Edit));
  try {
    run_evaluate(cfg);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(dropped), std::string::npos);
  }
}

TEST(EmitPairsTest, TwoLinesPerTranslatedPrediction) {
  TempDir dir;
  auto cfg = fast_config(dir);
  cfg.methods = {Method::Edit};
  run_build_dataset(cfg);
  const auto preds = run_translate(cfg, Method::Edit);
  const auto pairs = run_emit_pairs(cfg).at("edit");
  std::size_t fallbacks = 0;
  for (const auto& p : preds) fallbacks += p.fallback;
  EXPECT_EQ(pairs.size(), 2 * preds.size() - fallbacks);
  EXPECT_EQ(load_pair_file(OutputLayout{cfg.out_dir}.pairs(Method::Edit)), pairs);
  bool tagged = false;
  for (const auto& p : pairs) tagged |= p.pos_tag.has_value();
  EXPECT_TRUE(tagged);
}

TEST(RunAllTest, FullRunIsIdempotent) {
  TempDir dir;
  auto cfg = fast_config(dir);
  run_all(cfg);
  const auto first = snapshot(cfg.out_dir);
  for (const char* f : {"dataset/test.tsv", "censored/translation_table.tsv", "models/embeddings.bin",
                        "models/seq2seq.ckpt", "predictions/edit.test.tsv", "predictions/vector.test.tsv",
                        "predictions/seq2seq.test.tsv", "eval/report.json", "eval/report.txt", "pairs/edit.tsv",
                        "pairs/vector.tsv", "pairs/seq2seq.tsv", "manifest.json"})
    EXPECT_TRUE(first.count(f)) << f;
  run_all(cfg);
  EXPECT_EQ(snapshot(cfg.out_dir), first);
  const auto manifest = nlohmann::json::parse(first.at("manifest.json"));
  EXPECT_EQ(manifest["versions"]["oovt"], std::string(kVersion));
  EXPECT_TRUE(manifest["stages"].contains("train-seq2seq"));
}

TEST(ToyFixtureTest, DeterministicAndCategorised) {
  const auto a = toy::generate(1);
  const auto b = toy::generate(1);
  EXPECT_EQ(a.parallel, b.parallel);
  EXPECT_NE(toy::generate(2).parallel, a.parallel);
  std::set<std::string> candidates;
  for (const auto& c : extract_oov_candidates(a.parallel, a.lexicon)) candidates.insert(c.source_word);
  std::set<std::string> annotated;
  std::set<OOVCategory> kinds;
  for (const auto& [w, c] : a.categories) {
    annotated.insert(w);
    kinds.insert(c);
  }
  EXPECT_EQ(candidates, annotated);
  EXPECT_EQ(kinds.size(), kAllCategories.size());
  EXPECT_EQ(a.monolingual.size(), 200u);
}

TEST(ToyFixtureTest, ShippedFilesMatchGenerator) {
  TempDir dir;
  const auto fresh = toy::write_fixture(dir.path(), 1);
  const auto shipped = toy::fixture_paths(fs::path(OOVT_TEST_DATA_DIR) / "toy");
  for (auto member : {&toy::FixturePaths::lexicon, &toy::FixturePaths::source, &toy::FixturePaths::target,
                      &toy::FixturePaths::alignment, &toy::FixturePaths::monolingual,
                      &toy::FixturePaths::target_frequencies, &toy::FixturePaths::categories,
                      &toy::FixturePaths::config})
    EXPECT_EQ(slurp(shipped.*member), slurp(fresh.*member)) << (shipped.*member);
}

}  // namespace
}  // namespace oovt
