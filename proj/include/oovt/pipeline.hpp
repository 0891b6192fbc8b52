#pragma once

// End-to-end workflow: build dataset, train translators, predict, evaluate and
// emit integration pairs. Every stage reads its inputs from the config and the
// output directory and writes its results atomically beside a run manifest.
//
// Output layout under out_dir:
//   dataset/validation.tsv, dataset/test.tsv
//   censored/translation_table.tsv, censored/parallel.align
//   models/embeddings.bin, models/embeddings.log, models/seq2seq.ckpt, models/seq2seq.log
//   predictions/<method>.<split>.tsv
//   eval/report.json, eval/report.txt
//   pairs/<method>.tsv
//   manifest.json

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>
#include <unicode/uversion.h>

#include "oovt/alignment.hpp"
#include "oovt/corpus.hpp"
#include "oovt/dataset.hpp"
#include "oovt/edit_translator.hpp"
#include "oovt/errors.hpp"
#include "oovt/evaluation.hpp"
#include "oovt/integration.hpp"
#include "oovt/log.hpp"
#include "oovt/prediction.hpp"
#include "oovt/seq2seq.hpp"
#include "oovt/subword_embeddings.hpp"
#include "oovt/text.hpp"
#include "oovt/vector_translator.hpp"

namespace oovt {

inline constexpr std::string_view kVersion = "0.1.0";

namespace fs = std::filesystem;

struct PipelineConfig {
  fs::path lexicon;
  fs::path parallel_source, parallel_target;
  fs::path parallel_alignment;  // empty: align with IBM Model 1
  fs::path translation_table;   // empty: derive from the alignments
  fs::path monolingual;
  fs::path target_frequencies;
  fs::path categories;  // optional OOV category annotations

  std::size_t n_total = 1000;
  std::size_t n_validation = 500;
  std::uint64_t seed = 1;
  int ibm1_iterations = 10;
  bool case_fold = false;

  EmbeddingTrainConfig embeddings;
  seq2seq::Seq2SeqConfig seq2seq;

  fs::path out_dir = "oovt_out";
  std::vector<Method> methods = {Method::Edit, Method::Vector, Method::Seq2Seq};

  void validate() const {
    if (n_validation > n_total) throw UsageError("config: n_validation must not exceed n_total");
    if (ibm1_iterations < 1) throw UsageError("config: ibm1_iterations must be >= 1");
    if (methods.empty()) throw UsageError("config: no methods selected");
    embeddings.validate();
    seq2seq.validate();
  }

  bool uses(Method m) const { return std::find(methods.begin(), methods.end(), m) != methods.end(); }

  /// Relative paths inside `j` resolve against `base_dir`.
  static PipelineConfig from_json(const nlohmann::json& j, const fs::path& base_dir = {});
  static PipelineConfig load(const fs::path& path);
  nlohmann::json to_json() const;
};

/// Command-line values; anything set here wins over the config file.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> out_dir;
  std::optional<std::vector<Method>> methods;
};

inline void apply_overrides(PipelineConfig& cfg, const ConfigOverrides& o) {
  if (o.seed) cfg.seed = cfg.embeddings.seed = cfg.seq2seq.seed = *o.seed;
  if (o.out_dir) cfg.out_dir = *o.out_dir;
  if (o.methods) cfg.methods = *o.methods;
}

namespace detail {

using nlohmann::json;

class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw UsageError("config: " + where_ + " must be an object");
  }
  /// Rejects keys that were never asked for.
  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw UsageError("config: unknown key '" + prefix() + k + "'");
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (const json* v = find(key)) {
      try {
        out = v->get<T>();
      } catch (const json::exception&) {
        throw UsageError("config: '" + prefix() + key + "' has the wrong type");
      }
    }
  }

  void path(const std::string& key, fs::path& out, const fs::path& base) {
    std::string s;
    get(key, s);
    if (!s.empty()) out = base.empty() || fs::path(s).is_absolute() ? fs::path(s) : base / s;
  }

  std::string prefix() const { return where_.empty() ? "" : where_ + "."; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

inline void read_embeddings(Reader& r, EmbeddingTrainConfig& e) {
  r.get("dim", e.dim);
  r.get("window", e.window);
  r.get("negatives", e.negatives);
  r.get("epochs", e.epochs);
  r.get("initial_lr", e.initial_lr);
  r.get("min_word_count", e.min_word_count);
  r.get("n_min", e.n_min);
  r.get("n_max", e.n_max);
  r.get("bucket_count", e.bucket_count);
  r.get("seed", e.seed);
}

inline void read_seq2seq(Reader& r, seq2seq::Seq2SeqConfig& c) {
  std::string preset = "desk";
  r.get("preset", preset);
  if (preset == "paper") {
    c = seq2seq::Seq2SeqConfig::paper_preset();
  } else if (preset != "desk") {
    throw UsageError("config: seq2seq.preset must be 'desk' or 'paper'");
  }
  r.get("enc_layers", c.enc_layers);
  r.get("bidirectional_encoder", c.bidirectional_encoder);
  r.get("hidden_size", c.hidden_size);
  r.get("char_emb_size", c.char_emb_size);
  r.get("dropout", c.dropout);
  r.get("learning_rate", c.learning_rate);
  r.get("batch_size", c.batch_size);
  r.get("patience_epochs", c.patience_epochs);
  r.get("max_epochs", c.max_epochs);
  r.get("beam_size", c.beam_size);
  r.get("max_decode_len", c.max_decode_len);
  r.get("checkpoint_every_updates", c.checkpoint_every_updates);
  r.get("clip_norm", c.clip_norm);
  r.get("init_range", c.init_range);
  r.get("forget_bias", c.forget_bias);
  r.get("holdout_fraction", c.holdout_fraction);
  r.get("seed", c.seed);
}

}  // namespace detail

inline PipelineConfig PipelineConfig::from_json(const nlohmann::json& j, const fs::path& base) {
  PipelineConfig c;
  {
    detail::Reader r(j, "");
    r.path("lexicon", c.lexicon, base);
    if (const auto* p = r.find("parallel")) {
      detail::Reader pr(*p, "parallel");
      pr.path("source", c.parallel_source, base);
      pr.path("target", c.parallel_target, base);
      pr.path("alignment", c.parallel_alignment, base);
      pr.finish();
    }
    r.path("translation_table", c.translation_table, base);
    r.path("monolingual", c.monolingual, base);
    r.path("target_frequencies", c.target_frequencies, base);
    r.path("categories", c.categories, base);
    r.path("out_dir", c.out_dir, base);
    r.get("seed", c.seed);
    c.embeddings.seed = c.seq2seq.seed = c.seed;
    r.get("ibm1_iterations", c.ibm1_iterations);
    r.get("case_fold", c.case_fold);
    if (const auto* d = r.find("dataset")) {
      detail::Reader dr(*d, "dataset");
      dr.get("n_total", c.n_total);
      dr.get("n_validation", c.n_validation);
      dr.get("seed", c.seed);
      dr.finish();
    }
    if (const auto* e = r.find("embeddings")) {
      detail::Reader er(*e, "embeddings");
      detail::read_embeddings(er, c.embeddings);
      er.finish();
    }
    if (const auto* s = r.find("seq2seq")) {
      detail::Reader sr(*s, "seq2seq");
      const std::uint64_t seed = c.seq2seq.seed;
      detail::read_seq2seq(sr, c.seq2seq);  // a preset resets the seed too
      if (!s->contains("seed")) c.seq2seq.seed = seed;
      sr.finish();
    }
    if (const auto* m = r.find("methods")) {
      if (!m->is_array()) throw UsageError("config: 'methods' must be an array");
      c.methods.clear();
      for (const auto& x : *m) {
        if (!x.is_string()) throw UsageError("config: 'methods' entries must be strings");
        c.methods.push_back(parse_method(x.get<std::string>()));
      }
    }
    r.finish();
  }
  return c;
}

inline PipelineConfig PipelineConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("config " + path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

inline nlohmann::json PipelineConfig::to_json() const {
  nlohmann::json j;
  j["lexicon"] = lexicon.generic_string();
  j["parallel"] = {{"source", parallel_source.generic_string()},
                   {"target", parallel_target.generic_string()},
                   {"alignment", parallel_alignment.generic_string()}};
  j["translation_table"] = translation_table.generic_string();
  j["monolingual"] = monolingual.generic_string();
  j["target_frequencies"] = target_frequencies.generic_string();
  j["categories"] = categories.generic_string();
  j["out_dir"] = out_dir.generic_string();
  j["dataset"] = {{"n_total", n_total}, {"n_validation", n_validation}, {"seed", seed}};
  j["ibm1_iterations"] = ibm1_iterations;
  j["case_fold"] = case_fold;
  const auto& e = embeddings;
  j["embeddings"] = {{"dim", e.dim},           {"window", e.window},   {"negatives", e.negatives},
                     {"epochs", e.epochs},     {"initial_lr", e.initial_lr}, {"min_word_count", e.min_word_count},
                     {"n_min", e.n_min},       {"n_max", e.n_max},     {"bucket_count", e.bucket_count},
                     {"seed", e.seed}};
  const auto& s = seq2seq;
  j["seq2seq"] = {{"enc_layers", s.enc_layers},
                  {"bidirectional_encoder", s.bidirectional_encoder},
                  {"hidden_size", s.hidden_size},
                  {"char_emb_size", s.char_emb_size},
                  {"dropout", s.dropout},
                  {"learning_rate", s.learning_rate},
                  {"batch_size", s.batch_size},
                  {"patience_epochs", s.patience_epochs},
                  {"max_epochs", s.max_epochs},
                  {"beam_size", s.beam_size},
                  {"max_decode_len", s.max_decode_len},
                  {"checkpoint_every_updates", s.checkpoint_every_updates},
                  {"clip_norm", s.clip_norm},
                  {"init_range", s.init_range},
                  {"forget_bias", s.forget_bias},
                  {"holdout_fraction", s.holdout_fraction},
                  {"seed", s.seed}};
  auto& m = j["methods"] = nlohmann::json::array();
  for (auto x : methods) m.push_back(std::string(method_name(x)));
  return j;
}

// ---------------------------------------------------------------------------
// Output layout

struct OutputLayout {
  fs::path root;

  fs::path split(std::string_view name) const { return root / "dataset" / (std::string(name) + ".tsv"); }
  fs::path censored_table() const { return root / "censored" / "translation_table.tsv"; }
  fs::path censored_alignment() const { return root / "censored" / "parallel.align"; }
  fs::path embeddings() const { return root / "models" / "embeddings.bin"; }
  fs::path embeddings_log() const { return root / "models" / "embeddings.log"; }
  fs::path seq2seq() const { return root / "models" / "seq2seq.ckpt"; }
  fs::path seq2seq_log() const { return root / "models" / "seq2seq.log"; }
  fs::path predictions(Method m, std::string_view split = "test") const {
    return root / "predictions" / (std::string(method_name(m)) + "." + std::string(split) + ".tsv");
  }
  fs::path report_json() const { return root / "eval" / "report.json"; }
  fs::path report_text() const { return root / "eval" / "report.txt"; }
  fs::path pairs(Method m) const { return root / "pairs" / (std::string(method_name(m)) + ".tsv"); }
  fs::path manifest() const { return root / "manifest.json"; }
};

// ---------------------------------------------------------------------------
// Manifest

namespace detail {

inline std::uint64_t fnv1a64_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read file: " + p.string());
  std::uint64_t h = 14695981039346656037ull;
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  return h;
}

inline nlohmann::json file_record(const fs::path& p) {
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << fnv1a64_file(p);
  return {{"path", p.generic_string()}, {"bytes", fs::file_size(p)}, {"fnv1a64", hex.str()}};
}

inline void write_text(const fs::path& path, const std::string& content) {
  text::AtomicFile f(path);
  f.stream() << content;
  f.commit();
}

}  // namespace detail

/// Records one stage in manifest.json. No timestamps, so reruns leave the bytes unchanged.
inline void record_stage(const PipelineConfig& cfg, const std::string& stage, nlohmann::json details) {
  const OutputLayout out{cfg.out_dir};
  nlohmann::json m = nlohmann::json::object();
  if (fs::exists(out.manifest())) {
    std::ifstream in(out.manifest());
    m = nlohmann::json::parse(in, nullptr, false);
    if (m.is_discarded() || !m.is_object()) m = nlohmann::json::object();
  }
  m["tool"] = "oovt";
  m["versions"] = {{"oovt", kVersion},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"icu", U_ICU_VERSION},
                   {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  m["config"] = cfg.to_json();
  m["stages"][stage] = std::move(details);
  detail::write_text(out.manifest(), m.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Stages

namespace detail {

inline void require_file(const fs::path& p, std::string_view what) {
  if (p.empty()) throw UsageError("config: no " + std::string(what) + " path given");
  if (!fs::is_regular_file(p)) throw DataError("missing " + std::string(what) + " file: " + p.string());
}

inline std::vector<AlignedSentencePair> load_aligned(const PipelineConfig& cfg) {
  if (!cfg.parallel_alignment.empty()) {
    return load_parallel(cfg.parallel_source, cfg.parallel_target, cfg.parallel_alignment);
  }
  log::info("no alignment file given; aligning with IBM Model 1 (" + std::to_string(cfg.ibm1_iterations) +
            " iterations)");
  return align_ibm1(load_bitext(cfg.parallel_source, cfg.parallel_target), cfg.ibm1_iterations).pairs;
}

inline nlohmann::json input_records(const std::vector<std::pair<std::string, fs::path>>& files) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, p] : files)
    if (!p.empty()) j[name] = file_record(p);
  return j;
}

}  // namespace detail

inline DatasetSplit run_build_dataset(const PipelineConfig& cfg) {
  cfg.validate();
  detail::require_file(cfg.lexicon, "lexicon");
  detail::require_file(cfg.parallel_source, "parallel source");
  detail::require_file(cfg.parallel_target, "parallel target");
  if (!cfg.parallel_alignment.empty()) detail::require_file(cfg.parallel_alignment, "alignment");
  if (!cfg.translation_table.empty()) detail::require_file(cfg.translation_table, "translation table");

  const Lexicon lexicon = load_lexicon(cfg.lexicon);
  const auto pairs = detail::load_aligned(cfg);
  const TranslationTable table =
      cfg.translation_table.empty() ? derive_translation_table(pairs) : load_translation_table(cfg.translation_table);

  auto candidates = extract_oov_candidates(pairs, lexicon);
  log::info("one-count OOV pool: " + std::to_string(candidates.size()) + " candidates");
  const std::size_t pool = candidates.size();
  DatasetSplit split = sample_and_split(std::move(candidates), cfg.n_total, cfg.n_validation, cfg.seed);
  const CensoredResources censored = censor_resources(split, table, pairs);

  // Re-scan the censored resources before anything is written.
  const auto words = split.source_words();
  for (const auto& e : censored.table.entries)
    if (words.count(e.source_word)) throw DataError("censorship failed: table still holds '" + e.source_word + "'");
  for (const auto& e : lexicon)
    if (words.count(e.source_word)) throw DataError("censorship failed: lexicon holds '" + e.source_word + "'");
  for (const auto& p : censored.pairs)
    for (const auto& l : p.links)
      if (words.count(p.source_tokens[l.source]))
        throw DataError("censorship failed: link from '" + p.source_tokens[l.source] + "'");

  const OutputLayout out{cfg.out_dir};
  write_split_file(split.validation, out.split("validation"));
  write_split_file(split.test, out.split("test"));
  write_translation_table(censored.table, out.censored_table());
  {
    text::AtomicFile f(out.censored_alignment());
    for (const auto& p : censored.pairs) f.stream() << format_alignment(p.links) << '\n';
    f.commit();
  }
  log::info("split: " + std::to_string(split.validation.size()) + " validation, " +
            std::to_string(split.test.size()) + " test; censored table keeps " +
            std::to_string(censored.table.size()) + " of " + std::to_string(table.size()) + " entries");

  record_stage(cfg, "build-dataset",
               {{"inputs", detail::input_records({{"lexicon", cfg.lexicon},
                                                  {"parallel_source", cfg.parallel_source},
                                                  {"parallel_target", cfg.parallel_target},
                                                  {"parallel_alignment", cfg.parallel_alignment},
                                                  {"translation_table", cfg.translation_table}})},
                {"seed", cfg.seed},
                {"pool", pool},
                {"validation", split.validation.size()},
                {"test", split.test.size()},
                {"table_entries", table.size()},
                {"censored_table_entries", censored.table.size()},
                {"outputs", detail::input_records({{"validation", out.split("validation")},
                                                   {"test", out.split("test")},
                                                   {"censored_table", out.censored_table()},
                                                   {"censored_alignment", out.censored_alignment()}})}});
  return split;
}

inline DatasetSplit load_dataset(const PipelineConfig& cfg) {
  const OutputLayout out{cfg.out_dir};
  for (const char* s : {"validation", "test"})
    if (!fs::is_regular_file(out.split(s)))
      throw DataError("missing split file " + out.split(s).string() + "; run build-dataset first");
  DatasetSplit split;
  split.seed = cfg.seed;
  split.validation = load_split_file(out.split("validation"));
  split.test = load_split_file(out.split("test"));
  return split;
}

inline std::vector<OOVPair> load_split(const PipelineConfig& cfg, std::string_view name) {
  if (name != "test" && name != "validation")
    throw UsageError("unknown split '" + std::string(name) + "'; expected test or validation");
  const DatasetSplit s = load_dataset(cfg);
  return name == "test" ? s.test : s.validation;
}

/// Lexicon, censored table and target frequencies.
inline TranslationResources load_resources(const PipelineConfig& cfg) {
  detail::require_file(cfg.lexicon, "lexicon");
  detail::require_file(cfg.target_frequencies, "target frequency");
  const OutputLayout out{cfg.out_dir};
  if (!fs::is_regular_file(out.censored_table()))
    throw DataError("missing censored table " + out.censored_table().string() + "; run build-dataset first");
  return {load_lexicon(cfg.lexicon), load_translation_table(out.censored_table()),
          load_target_frequencies(cfg.target_frequencies)};
}

inline SubwordEmbeddingModel run_train_embeddings(const PipelineConfig& cfg) {
  cfg.validate();
  detail::require_file(cfg.monolingual, "monolingual");
  const auto corpus = load_monolingual(cfg.monolingual);
  auto result = train_subword_embeddings(corpus, cfg.embeddings);
  const OutputLayout out{cfg.out_dir};
  std::string loss_log;
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    loss_log += "epoch " + std::to_string(e + 1) + "\tloss " + text::format_double(result.epoch_loss[e]) + "\n";
  }
  result.model.save(out.embeddings());
  detail::write_text(out.embeddings_log(), loss_log);
  record_stage(cfg, "train-embeddings",
               {{"inputs", detail::input_records({{"monolingual", cfg.monolingual}})},
                {"seed", cfg.embeddings.seed},
                {"sentences", corpus.sentences.size()},
                {"epoch_loss", result.epoch_loss},
                {"outputs", detail::input_records({{"model", out.embeddings()}})}});
  return std::move(result.model);
}

inline seq2seq::Network run_train_seq2seq(const PipelineConfig& cfg) {
  cfg.validate();
  const auto res = load_resources(cfg);
  const auto split = load_dataset(cfg);
  const auto training = seq2seq::build_training_set(res.table, res.lexicon);
  log::info("seq2seq: " + std::to_string(training.size()) + " training pairs, " +
            std::to_string(split.validation.size()) + " validation pairs");
  seq2seq::TrainHooks hooks;
  std::string epoch_log;
  hooks.on_epoch = [&](const seq2seq::EpochLog& e) { epoch_log += seq2seq::format_epoch_log(e) + "\n"; };
  auto result = seq2seq::train(training, split.validation, cfg.seq2seq, hooks);
  const OutputLayout out{cfg.out_dir};
  seq2seq::save_checkpoint(result.model, out.seq2seq());
  detail::write_text(out.seq2seq_log(), epoch_log);
  record_stage(cfg, "train-seq2seq",
               {{"seed", cfg.seq2seq.seed},
                {"training_pairs", training.size()},
                {"epochs", result.log.size()},
                {"best_epoch", result.best_epoch},
                {"updates", result.updates},
                {"best_validation_exact_match", result.best_validation.exact_match},
                {"best_validation_loss", result.best_validation.loss},
                {"outputs", detail::input_records({{"model", out.seq2seq()}})}});
  return std::move(result.model);
}

/// One prediction per split entry, in split order. Trains the vector or
/// seq2seq model first when its file is missing.
inline std::vector<Prediction> run_translate(const PipelineConfig& cfg, Method method,
                                             std::string_view split_name = "test") {
  cfg.validate();
  const auto split = load_split(cfg, split_name);
  const OutputLayout out{cfg.out_dir};
  std::vector<Prediction> preds;
  preds.reserve(split.size());

  switch (method) {
    case Method::Edit: {
      const EditTranslator t(load_resources(cfg));
      for (const auto& p : split) preds.push_back(t.translate(p.source_word));
      break;
    }
    case Method::Vector: {
      SubwordEmbeddingModel model = fs::is_regular_file(out.embeddings())
                                        ? SubwordEmbeddingModel::load(out.embeddings())
                                        : run_train_embeddings(cfg);
      const VectorTranslator t(std::move(model), load_resources(cfg));
      for (const auto& p : split) preds.push_back(t.translate(p.source_word));
      break;
    }
    case Method::Seq2Seq: {
      const seq2seq::Network net =
          fs::is_regular_file(out.seq2seq()) ? seq2seq::load_checkpoint(out.seq2seq()) : run_train_seq2seq(cfg);
      for (const auto& p : split) {
        Prediction pr{p.source_word, net.translate(p.source_word), "", Method::Seq2Seq, false};
        // An empty decode cannot be written as a translation; copy the word through.
        if (pr.predicted.empty()) {
          pr.predicted = pr.oov;
          pr.fallback = true;
        }
        preds.push_back(std::move(pr));
      }
      break;
    }
  }

  std::size_t fallbacks = 0;
  for (const auto& p : preds) fallbacks += p.fallback;
  write_predictions(preds, out.predictions(method, split_name));
  log::info(std::string(method_name(method)) + ": " + std::to_string(preds.size()) + " predictions on " +
            std::string(split_name) + " (" + std::to_string(fallbacks) + " copy-through)");
  record_stage(cfg, "translate." + std::string(method_name(method)) + "." + std::string(split_name),
               {{"predictions", preds.size()},
                {"fallbacks", fallbacks},
                {"outputs", detail::input_records({{"predictions", out.predictions(method, split_name)}})}});
  return preds;
}

struct EvaluationOutput {
  std::map<std::string, EvalReport> reports;  // keyed by method name
  ComparisonTable comparison;
  std::map<std::string, EvalReport> stratified;  // empty without annotations
  double random_baseline = 0;
};

/// Target side of the censored training resources.
inline std::set<std::string> target_vocabulary(const TranslationResources& res) {
  std::set<std::string> v;
  for (const auto& e : res.table.entries) v.insert(e.target_word);
  for (const auto& e : res.lexicon) v.insert(e.target_word);
  return v;
}

inline EvaluationOutput run_evaluate(const PipelineConfig& cfg) {
  cfg.validate();
  const auto test = load_split(cfg, "test");
  const OutputLayout out{cfg.out_dir};
  const EvalOptions opt{cfg.case_fold};

  std::map<std::string, OOVCategory> annotations;
  if (!cfg.categories.empty()) {
    detail::require_file(cfg.categories, "categories");
    std::set<std::string> words;
    for (const auto& p : test) words.insert(p.source_word);
    for (const auto& [w, c] : load_annotations(cfg.categories))
      if (words.count(w)) annotations.emplace(w, c);
  }

  EvaluationOutput ev;
  for (Method m : cfg.methods) {
    const auto path = out.predictions(m);
    if (!fs::is_regular_file(path))
      throw DataError("missing predictions " + path.string() + "; run translate --method " +
                      std::string(method_name(m)) + " first");
    const auto joined = join_with_gold(load_predictions(path), test);
    const std::string name(method_name(m));
    ev.reports[name] = evaluate(joined, opt);
    if (!annotations.empty()) ev.stratified[name] = stratified_report(joined, annotations, opt);
    log::info(name + ": exact match " + percent(ev.reports[name].overall_accuracy()) + " on " +
              std::to_string(test.size()) + " test OOVs");
  }
  ev.comparison = method_comparison(ev.reports, "test");
  const auto target_vocab = target_vocabulary(load_resources(cfg));
  ev.random_baseline = random_baseline_accuracy(test, target_vocab);

  nlohmann::json j;
  j["test_size"] = test.size();
  j["comparison"] = to_json(ev.comparison);
  for (const auto& [m, r] : ev.reports) j["methods"][m] = to_json(r);
  if (!ev.stratified.empty())
    for (const auto& [m, r] : ev.stratified) j["stratified"][m] = to_json(r);
  j["random_baseline_accuracy"] = ev.random_baseline;
  j["target_vocabulary_size"] = target_vocab.size();
  detail::write_text(out.report_json(), j.dump(2) + "\n");

  std::string txt = "Exact-match accuracy\n" + render_comparison(ev.comparison);
  std::ostringstream baseline;
  baseline << std::setprecision(3) << 100.0 * ev.random_baseline;
  txt += "Random baseline (uniform over " + std::to_string(target_vocab.size()) + " target types): " +
         baseline.str() + "%\n";
  if (!ev.stratified.empty()) txt += "\nAccuracy by OOV category\n" + render_stratified(ev.stratified);
  detail::write_text(out.report_text(), txt);

  record_stage(cfg, "evaluate",
               {{"annotations", annotations.size()},
                {"outputs", detail::input_records({{"report_json", out.report_json()},
                                                   {"report_text", out.report_text()}})}});
  return ev;
}

inline std::map<std::string, std::vector<AugmentedPair>> run_emit_pairs(const PipelineConfig& cfg) {
  cfg.validate();
  detail::require_file(cfg.lexicon, "lexicon");
  const OutputLayout out{cfg.out_dir};
  // POS of a predicted target: the first lexicon entry translating to it.
  std::map<std::string, std::string> pos_of_target;
  for (const auto& e : load_lexicon(cfg.lexicon)) pos_of_target.emplace(e.target_word, e.pos_tag);

  std::map<std::string, std::vector<AugmentedPair>> all;
  nlohmann::json outputs = nlohmann::json::object();
  for (Method m : cfg.methods) {
    const auto path = out.predictions(m);
    if (!fs::is_regular_file(path))
      throw DataError("missing predictions " + path.string() + "; run translate --method " +
                      std::string(method_name(m)) + " first");
    const auto preds = load_predictions(path);
    std::map<std::string, std::string> pos;
    for (const auto& p : preds)
      if (auto it = pos_of_target.find(p.predicted); !p.fallback && it != pos_of_target.end())
        pos.emplace(p.oov, it->second);
    auto pairs = emit_augmented_pairs(preds, &pos);
    write_pair_file(pairs, out.pairs(m));
    const std::string name(method_name(m));
    log::info(name + ": " + std::to_string(pairs.size()) + " augmented pairs");
    outputs[name] = detail::file_record(out.pairs(m));
    all[name] = std::move(pairs);
  }
  record_stage(cfg, "emit-pairs", {{"outputs", outputs}});
  return all;
}

/// Every stage in order; retrains models so the run depends only on the config.
inline EvaluationOutput run_all(const PipelineConfig& cfg) {
  run_build_dataset(cfg);
  if (cfg.uses(Method::Vector)) run_train_embeddings(cfg);
  if (cfg.uses(Method::Seq2Seq)) run_train_seq2seq(cfg);
  for (Method m : cfg.methods) run_translate(cfg, m);
  auto ev = run_evaluate(cfg);
  run_emit_pairs(cfg);
  return ev;
}

}  // namespace oovt
