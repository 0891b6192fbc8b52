// Command-line front end for the OOV translation pipeline.
//
// Exit codes: 0 success, 1 other failure, 2 usage or configuration error,
// 3 data error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oovt/errors.hpp"
#include "oovt/log.hpp"
#include "oovt/pipeline.hpp"
#include "oovt/toy.hpp"

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2, kData = 3 };

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::vector<std::string> methods;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_method) {
  cmd->add_option("--config", f.config, "pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "seed for sampling and training; overrides the config");
  cmd->add_option("--out-dir", f.out_dir, "output directory; overrides the config");
  if (with_method)
    cmd->add_option("--method", f.methods, "edit, vector or seq2seq; repeatable")->delimiter(',');
}

oovt::PipelineConfig resolve(const CommonFlags& f) {
  auto cfg = oovt::PipelineConfig::load(f.config);
  oovt::ConfigOverrides o;
  o.seed = f.seed;
  if (f.out_dir) o.out_dir = *f.out_dir;
  if (!f.methods.empty()) {
    std::vector<oovt::Method> ms;
    for (const auto& m : f.methods) ms.push_back(oovt::parse_method(m));
    o.methods = ms;
  }
  oovt::apply_overrides(cfg, o);
  cfg.validate();
  return cfg;
}

void print_report(const oovt::PipelineConfig& cfg) {
  std::ifstream in(oovt::OutputLayout{cfg.out_dir}.report_text());
  std::cout << in.rdbuf();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OOV word translation: dataset construction, translators, evaluation"};
  app.require_subcommand(1);
  bool verbose = false, quiet = false;
  app.add_flag("-v,--verbose", verbose, "debug logging");
  app.add_flag("-q,--quiet", quiet, "warnings and errors only");

  CommonFlags flags;
  auto* build = app.add_subcommand("build-dataset", "extract one-count OOVs, split, censor resources");
  auto* embed = app.add_subcommand("train-embeddings", "train subword embeddings on the monolingual corpus");
  auto* s2s = app.add_subcommand("train-seq2seq", "train the character-level translator");
  auto* translate = app.add_subcommand("translate", "predict translations for a split");
  auto* evaluate = app.add_subcommand("evaluate", "score predictions against the test split");
  auto* emit = app.add_subcommand("emit-pairs", "write augmented translation pairs for an SMT system");
  auto* run = app.add_subcommand("run", "all stages in order");
  for (auto* c : {build, embed, s2s}) add_common(c, flags, false);
  for (auto* c : {translate, evaluate, emit, run}) add_common(c, flags, true);
  std::string split = "test";
  translate->add_option("--split", split, "test or validation")->check(CLI::IsMember({"test", "validation"}));

  auto* toy = app.add_subcommand("make-toy", "write the synthetic toy language fixture and its config");
  std::string toy_dir;
  std::uint64_t toy_seed = 1;
  toy->add_option("dir", toy_dir, "output directory")->required();
  toy->add_option("--seed", toy_seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  oovt::log::set_level(verbose ? oovt::log::Level::Debug : quiet ? oovt::log::Level::Warn : oovt::log::Level::Info);

  try {
    if (toy->parsed()) {
      const auto paths = oovt::toy::write_fixture(toy_dir, toy_seed);
      oovt::log::info("wrote toy fixture; config at " + paths.config.string());
      return kOk;
    }
    const auto cfg = resolve(flags);
    if (build->parsed()) oovt::run_build_dataset(cfg);
    if (embed->parsed()) oovt::run_train_embeddings(cfg);
    if (s2s->parsed()) oovt::run_train_seq2seq(cfg);
    if (translate->parsed())
      for (auto m : cfg.methods) oovt::run_translate(cfg, m, split);
    if (evaluate->parsed()) {
      oovt::run_evaluate(cfg);
      print_report(cfg);
    }
    if (emit->parsed()) oovt::run_emit_pairs(cfg);
    if (run->parsed()) {
      oovt::run_all(cfg);
      print_report(cfg);
    }
    return kOk;
  } catch (const oovt::UsageError& e) {
    oovt::log::error(e.what());
    return kUsage;
  } catch (const oovt::DataError& e) {
    oovt::log::error(e.what());
    return kData;
  } catch (const std::exception& e) {
    oovt::log::error(e.what());
    return kFailure;
  }
}
