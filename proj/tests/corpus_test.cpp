#include "oovt/alignment.hpp"
#include "oovt/corpus.hpp"
#include "oovt/log.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

namespace oovt {
namespace {

using testing_util::TempDir;

TEST(LexiconTest, ParsesEntriesInOrder) {
  TempDir d;
  auto lex = load_lexicon(d.write("lex.tsv", "perro\tNOUN\tdog\nbanco\tNOUN\tbank\n\nbanco\tNOUN\tbench\n"));
  ASSERT_EQ(lex.size(), 3u);
  EXPECT_EQ(lex[0], (LexiconEntry{"perro", "NOUN", "dog"}));
  EXPECT_EQ(lex[1].target_word, "bank");
  EXPECT_EQ(lex[2].target_word, "bench");
}

TEST(LexiconTest, MalformedLineNamesLine) {
  TempDir d;
  try {
    load_lexicon(d.write("lex.tsv", "perro dog\n"));
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_EQ(e.line(), 1u) << e.what();
  }
}

TEST(LexiconTest, MissingFileThrows) { EXPECT_THROW(load_lexicon("/nonexistent/lex.tsv"), DataError); }

TEST(LexiconTest, EmptyLexiconWarns) {
  TempDir d;
  log::Capture cap;
  EXPECT_TRUE(load_lexicon(d.write("lex.tsv", "")).empty());
  EXPECT_TRUE(cap.contains(log::Level::Warn, "lexicon is empty"));
}

TEST(LexiconTest, MultiwordTargetAndNormalization) {
  TempDir d;
  // "cafe" with combining acute is composed to a single code point.
  auto lex = load_lexicon(d.write("lex.tsv", "cafe\xCC\x81\tNOUN\tcoffee  shop\n"));
  ASSERT_EQ(lex.size(), 1u);
  EXPECT_EQ(lex[0].source_word, "caf\xC3\xA9");
  EXPECT_EQ(lex[0].target_word, "coffee shop");
}

TEST(TranslationTableTest, ParsesAndRangeChecks) {
  TempDir d;
  auto t = load_translation_table(d.write("t.tsv", "casa\thouse\t0.9\t7\n"));
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.entries[0], (TranslationTableEntry{"casa", "house", 0.9, 7}));
  EXPECT_THROW(load_translation_table(d.write("b1.tsv", "casa\thouse\t1.5\t7\n")), DataError);
  EXPECT_THROW(load_translation_table(d.write("b2.tsv", "casa\thouse\t0.5\t7.5\n")), DataError);
  EXPECT_THROW(load_translation_table(d.write("b3.tsv", "casa\thouse\t0.5\t-1\n")), DataError);
  EXPECT_THROW(load_translation_table(d.write("b4.tsv", "casa\thouse\t0.5\n")), DataError);
  log::Capture cap;
  EXPECT_TRUE(load_translation_table(d.write("e.tsv", "")).empty());
  EXPECT_EQ(cap.count(log::Level::Warn), 1u);
}

TEST(ParallelTest, LoadsLinks) {
  TempDir d;
  auto pairs = load_parallel(d.write("s", "la casa\n"), d.write("t", "the house\n"), d.write("a", "0-0 1-1\n"));
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].links, (std::set<Link>{{0, 0}, {1, 1}}));
  EXPECT_EQ(pairs[0].source_tokens, (std::vector<std::string>{"la", "casa"}));
}

TEST(ParallelTest, RejectsBadInput) {
  TempDir d;
  EXPECT_THROW(load_parallel(d.write("s", "la casa\n"), d.write("t", "the house\n"), d.write("a", "0-0 5-1\n")),
               DataError);
  EXPECT_THROW(load_parallel(d.write("s3", "a\nb\nc\n"), d.write("t2", "x\ny\n"), d.write("a3", "\n\n\n")), DataError);
  EXPECT_THROW(load_parallel(d.write("s", "la casa\n"), d.write("t", "the house\n"), d.write("a", "0:0\n")),
               DataError);
  EXPECT_THROW(load_parallel(d.write("s", "la casa\n"), d.write("t", "the house\n"), d.write("a", "\n\n")),
               DataError);
}

TEST(ParallelTest, WriteReadRoundTrip) {
  TempDir d;
  std::vector<AlignedSentencePair> pairs = {{{"la", "casa"}, {"the", "house"}, {{0, 0}, {1, 1}}},
                                            {{"un", "perro"}, {"a", "dog"}, {}}};
  write_parallel(pairs, d / "s", d / "t", d / "a");
  EXPECT_EQ(load_parallel(d / "s", d / "t", d / "a"), pairs);
}

TEST(TargetFrequencyTest, LookupAndErrors) {
  TempDir d;
  auto f = load_target_frequencies(d.write("f.tsv", "the\t1000000\n"));
  EXPECT_EQ(f.lookup("the"), 1000000);
  EXPECT_EQ(f.lookup("zyzzyva"), 0);
  EXPECT_THROW(load_target_frequencies(d.write("g.tsv", "the\t-5\n")), DataError);
  EXPECT_THROW(load_target_frequencies(d.write("h.tsv", "the\tmany\n")), DataError);
}

TEST(MonolingualTest, CountsAreCensus) {
  TempDir d;
  auto c = load_monolingual(d.write("m.txt", "a b a\n\nb c\n"));
  EXPECT_EQ(c.sentences.size(), 2u);
  EXPECT_EQ(c.token_counts, (std::map<std::string, std::int64_t>{{"a", 2}, {"b", 2}, {"c", 1}}));
}

TEST(DeriveTableTest, SingleLink) {
  auto t = derive_translation_table({{{"la"}, {"the"}, {{0, 0}}}});
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.entries[0], (TranslationTableEntry{"la", "the", 1.0, 1}));
}

TEST(DeriveTableTest, LinkCensus) {
  std::vector<AlignedSentencePair> pairs = {
      {{"la"}, {"the"}, {{0, 0}}}, {{"la"}, {"the"}, {{0, 0}}}, {{"la"}, {"a"}, {{0, 0}}}, {{"x"}, {"y"}, {}}};
  auto t = derive_translation_table(pairs);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.entries[0].target_word, "a");
  EXPECT_EQ(t.entries[0].count, 1);
  EXPECT_DOUBLE_EQ(t.entries[0].prob, 1.0 / 3.0);
  EXPECT_EQ(t.entries[1].target_word, "the");
  EXPECT_EQ(t.entries[1].count, 2);
  EXPECT_DOUBLE_EQ(t.entries[1].prob, 2.0 / 3.0);
}

// Random corpora: per-source probabilities sum to 1, counts sum to the number of links.
TEST(DeriveTableTest, CensusInvariantsOnRandomCorpora) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> len(1, 6), word(0, 7), coin(0, 2);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<AlignedSentencePair> pairs;
    std::size_t links = 0;
    for (int k = 0; k < 20; ++k) {
      AlignedSentencePair p;
      for (int i = len(rng); i > 0; --i) p.source_tokens.push_back("s" + std::to_string(word(rng)));
      for (int i = len(rng); i > 0; --i) p.target_tokens.push_back("t" + std::to_string(word(rng)));
      for (std::size_t i = 0; i < p.source_tokens.size(); ++i)
        for (std::size_t j = 0; j < p.target_tokens.size(); ++j)
          if (coin(rng) == 0) p.links.insert({i, j});
      links += p.links.size();
      pairs.push_back(std::move(p));
    }
    auto t = derive_translation_table(pairs);
    std::map<std::string, double> mass;
    std::int64_t total = 0;
    for (const auto& e : t.entries) {
      mass[e.source_word] += e.prob;
      total += e.count;
      EXPECT_GE(e.count, 1);
    }
    for (const auto& [s, m] : mass) EXPECT_NEAR(m, 1.0, 1e-6) << s;
    EXPECT_EQ(static_cast<std::size_t>(total), links);
  }
}

TEST(DeriveTableTest, WriteReloadRoundTrip) {
  TempDir d;
  std::vector<AlignedSentencePair> pairs = {{{"la", "casa"}, {"the", "house"}, {{0, 0}, {1, 1}, {1, 0}}},
                                            {{"la"}, {"the"}, {{0, 0}}},
                                            {{"casa", "la"}, {"home", "the"}, {{0, 0}, {1, 1}}}};
  auto t = derive_translation_table(pairs);
  write_translation_table(t, d / "t.tsv");
  EXPECT_EQ(load_translation_table(d / "t.tsv"), t);
}

TEST(SourceVocabularyTest, SortedUnion) {
  Lexicon lex = {{"perro", "NOUN", "dog"}, {"casa", "NOUN", "house"}};
  TranslationTable t;
  t.entries = {{"casa", "home", 0.5, 1}, {"azul", "blue", 1.0, 3}};
  EXPECT_EQ(source_vocabulary(lex, t), (std::vector<std::string>{"azul", "casa", "perro"}));
}

// EM on the classic two-sentence corpus. Expected values come from a separate
// straightforward EM implementation (no NULL word, uniform start).
Bitext classic() { return {{{"la", "casa"}, {"the", "house"}}, {{"la"}, {"the"}}}; }

TEST(Ibm1Test, FirstIterationsMatchReference) {
  Ibm1Model m(classic());
  EXPECT_NEAR(m.iterate(), -2.0794415416798357, 1e-12);
  EXPECT_NEAR(m.prob("la", "the"), 0.75, 1e-12);
  EXPECT_NEAR(m.prob("casa", "house"), 0.5, 1e-12);
  EXPECT_NEAR(m.iterate(), -1.7385149547092427, 1e-12);
  EXPECT_NEAR(m.prob("la", "the"), 0.8275862068965517, 1e-12);
  EXPECT_NEAR(m.prob("casa", "house"), 0.625, 1e-12);
}

TEST(Ibm1Test, ConvergesOnClassicCorpus) {
  auto r = align_ibm1(classic(), 20);
  EXPECT_GT(r.model.prob("la", "the"), 0.99);
  EXPECT_NEAR(r.model.prob("la", "the"), 0.9999942098008086, 1e-12);
  EXPECT_NEAR(r.log_likelihood[19], -1.3872905201923318, 1e-12);
  EXPECT_NEAR(r.log_likelihood[20], -1.387172578200547, 1e-12);
  ASSERT_EQ(r.log_likelihood.size(), 21u);
  for (std::size_t k = 1; k < r.log_likelihood.size(); ++k)
    EXPECT_GE(r.log_likelihood[k], r.log_likelihood[k - 1] - 1e-9 * std::abs(r.log_likelihood[k - 1]));
  // casa -> house converges more slowly than la -> the.
  EXPECT_GT(align_ibm1(classic(), 60).model.prob("casa", "house"), 0.99);
}

TEST(Ibm1Test, ViterbiLinksAndTable) {
  auto r = align_ibm1(classic(), 20);
  EXPECT_EQ(r.pairs[0].links, (std::set<Link>{{0, 0}, {1, 1}}));
  EXPECT_EQ(r.pairs[1].links, (std::set<Link>{{0, 0}}));
  ASSERT_EQ(r.table.size(), 2u);
  EXPECT_EQ(r.table.entries[0], (TranslationTableEntry{"casa", "house", 1.0, 1}));
  EXPECT_EQ(r.table.entries[1], (TranslationTableEntry{"la", "the", 1.0, 2}));
}

TEST(Ibm1Test, SinglePair) {
  auto r = align_ibm1({{{"a"}, {"x"}}}, 1);
  EXPECT_EQ(r.model.prob("a", "x"), 1.0);
}

TEST(Ibm1Test, RejectsBadInput) {
  EXPECT_THROW(align_ibm1({}, 5), DataError);
  EXPECT_THROW(align_ibm1({{{"a"}, {}}}, 5), DataError);
  EXPECT_THROW(align_ibm1(classic(), 0), UsageError);
}

TEST(Ibm1Test, LikelihoodMonotoneOnRandomCorpora) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> len(1, 7), word(0, 11);
  for (int trial = 0; trial < 20; ++trial) {
    Bitext corpus;
    for (int k = 0; k < 30; ++k) {
      std::vector<std::string> s, t;
      for (int i = len(rng); i > 0; --i) s.push_back("s" + std::to_string(word(rng)));
      for (int i = len(rng); i > 0; --i) t.push_back("t" + std::to_string(word(rng)));
      corpus.emplace_back(s, t);
    }
    auto r = align_ibm1(corpus, 15);
    for (std::size_t k = 1; k < r.log_likelihood.size(); ++k)
      EXPECT_GE(r.log_likelihood[k], r.log_likelihood[k - 1] - 1e-9 * std::abs(r.log_likelihood[k - 1]));
  }
}

}  // namespace
}  // namespace oovt
