#include "oovt/edit_translator.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <tuple>

namespace oovt {
namespace {

// Top-down recursion over suffixes; shares no code with the row-based DP.
std::size_t reference_distance(const std::u32string& a, const std::u32string& b) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  std::function<std::size_t(std::size_t, std::size_t)> d = [&](std::size_t i, std::size_t j) -> std::size_t {
    if (i == a.size()) return b.size() - j;
    if (j == b.size()) return a.size() - i;
    auto key = std::pair{i, j};
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    std::size_t r = a[i] == b[j] ? d(i + 1, j + 1) : 1 + std::min({d(i + 1, j), d(i, j + 1), d(i + 1, j + 1)});
    return memo[key] = r;
  };
  return d(0, 0);
}

TEST(LevenshteinTest, Examples) {
  EXPECT_EQ(levenshtein("", "abc"), 3u);
  EXPECT_EQ(levenshtein("gato", "gato"), 0u);
  EXPECT_EQ(levenshtein("kitten", "sitting"), 3u);
  EXPECT_EQ(levenshtein("", ""), 0u);
}

TEST(LevenshteinTest, CountsScalarValuesNotBytes) {
  EXPECT_EQ(levenshtein("caf\xC3\xA9", "cafe"), 1u);
  EXPECT_EQ(levenshtein("\xE6\x97\xA5\xE6\x9C\xAC", "\xE6\x97\xA5"), 1u);
  // Decomposed input is composed before comparison.
  EXPECT_EQ(levenshtein(unicode::normalize("cafe\xCC\x81"), "caf\xC3\xA9"), 0u);
}

TEST(LevenshteinTest, MatchesReferenceOnRandomPairs) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> len(0, 8), ch(0, 3);
  for (int i = 0; i < 2000; ++i) {
    std::u32string a, b;
    for (int k = len(rng); k > 0; --k) a.push_back(U'a' + static_cast<char32_t>(ch(rng)));
    for (int k = len(rng); k > 0; --k) b.push_back(U'a' + static_cast<char32_t>(ch(rng)));
    ASSERT_EQ(levenshtein(a, b), reference_distance(a, b)) << unicode::encode(a) << " / " << unicode::encode(b);
  }
}

TEST(LevenshteinTest, MetricAxioms) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> len(0, 12), ch(0, 4);
  auto rnd = [&] {
    std::u32string s;
    for (int k = len(rng); k > 0; --k) s.push_back(U'a' + static_cast<char32_t>(ch(rng)));
    return s;
  };
  for (int i = 0; i < 3000; ++i) {
    auto a = rnd(), b = rnd(), c = rnd();
    const auto ab = levenshtein(a, b), ba = levenshtein(b, a);
    EXPECT_EQ(ab, ba);
    EXPECT_EQ(ab == 0, a == b);
    EXPECT_LE(levenshtein(a, c), ab + levenshtein(b, c));
    EXPECT_GE(ab, std::max(a.size(), b.size()) - std::min(a.size(), b.size()));
    EXPECT_LE(ab, std::max(a.size(), b.size()));
  }
}

TEST(CandidatesTest, AllWordsAtMinimumDistance) {
  auto c = min_distance_candidates("gatoz", {"gato", "gatos", "perro"});
  EXPECT_EQ(c.distance, 1u);
  EXPECT_EQ(c.words, (std::set<std::string>{"gato", "gatos"}));
  auto exact = min_distance_candidates("perro", {"gato", "perro", "perro"});
  EXPECT_EQ(exact.distance, 0u);
  EXPECT_EQ(exact.words, (std::set<std::string>{"perro"}));
  EXPECT_THROW(min_distance_candidates("x", {}), DataError);
}

TEST(CandidatesTest, MatchesBruteForce) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> len(1, 9), ch(0, 5);
  auto rnd = [&] {
    std::string s;
    for (int k = len(rng); k > 0; --k) s.push_back(static_cast<char>('a' + ch(rng)));
    return s;
  };
  for (int t = 0; t < 300; ++t) {
    std::vector<std::string> vocab;
    for (int k = 0; k < 30; ++k) vocab.push_back(rnd());
    auto q = rnd();
    std::size_t best = SIZE_MAX;
    for (const auto& w : vocab) best = std::min(best, reference_distance(unicode::decode(q), unicode::decode(w)));
    std::set<std::string> expected;
    for (const auto& w : vocab)
      if (reference_distance(unicode::decode(q), unicode::decode(w)) == best) expected.insert(w);
    auto c = min_distance_candidates(q, vocab);
    EXPECT_EQ(c.distance, best);
    EXPECT_EQ(c.words, expected);
  }
}

TranslationResources gato_fixture() {
  TranslationResources r;
  r.table.entries = {{"gato", "cat", 5.0 / 6.0, 5}, {"gato", "feline", 1.0 / 6.0, 1}, {"gatos", "cats", 1.0, 2},
                     {"perro", "dog", 1.0, 9}};
  return r;
}

TEST(PickTest, PooledCounts) {
  auto r = gato_fixture();
  EXPECT_EQ(pick_translation({1, {"gato", "gatos"}}, r.table, r.lexicon, r.frequencies), "cat");
}

TEST(PickTest, FrequencyThenLexicographicTieBreak) {
  TranslationTable t;
  t.entries = {{"gato", "cats", 0.5, 2}, {"gato", "cat", 0.5, 2}};
  TargetFrequencyTable f({{"cat", 1000}, {"cats", 500}});
  EXPECT_EQ(pick_translation({1, {"gato"}}, t, {}, f), "cat");
  TargetFrequencyTable g({{"cat", 10}, {"cats", 500}});
  EXPECT_EQ(pick_translation({1, {"gato"}}, t, {}, g), "cats");
  EXPECT_EQ(pick_translation({1, {"gato"}}, t, {}, {}), "cat");
}

TEST(PickTest, LexiconPseudoCount) {
  Lexicon lex = {{"perro", "NOUN", "dog"}};
  EXPECT_EQ(pick_translation({0, {"perro"}}, {}, lex, {}), "dog");
  // One lexicon entry loses to two aligned occurrences.
  TranslationTable t;
  t.entries = {{"perro", "hound", 1.0, 2}};
  EXPECT_EQ(pick_translation({0, {"perro"}}, t, lex, {}), "hound");
  EXPECT_THROW(pick_translation({0, {"nada"}}, t, lex, {}), NoTranslation);
}

// Brute-force score census: full sort by (-score, -freq, target).
std::string census_pick(const std::set<std::string>& cands, const TranslationTable& t, const Lexicon& lex,
                        const TargetFrequencyTable& f) {
  std::map<std::string, std::int64_t> score;
  for (const auto& e : t.entries)
    if (cands.count(e.source_word)) score[e.target_word] += e.count;
  for (const auto& e : lex)
    if (cands.count(e.source_word)) score[e.target_word] += 1;
  std::vector<std::tuple<std::int64_t, std::int64_t, std::string>> rows;
  for (const auto& [w, s] : score) rows.emplace_back(-s, -f.lookup(w), w);
  std::sort(rows.begin(), rows.end());
  return std::get<2>(rows.front());
}

TEST(PickTest, AgreesWithCensusOracle) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> src(0, 5), tgt(0, 5), cnt(1, 3), fr(0, 2), coin(0, 1);
  int ties = 0;
  for (int trial = 0; trial < 500; ++trial) {
    TranslationTable t;
    Lexicon lex;
    for (int k = 0; k < 8; ++k)
      t.entries.push_back({"s" + std::to_string(src(rng)), "t" + std::to_string(tgt(rng)), 0.5, cnt(rng)});
    for (int k = 0; k < 4; ++k) lex.push_back({"s" + std::to_string(src(rng)), "N", "t" + std::to_string(tgt(rng))});
    TargetFrequencyTable f;
    for (int k = 0; k < 6; ++k)
      if (coin(rng)) f.set("t" + std::to_string(k), fr(rng));
    std::set<std::string> cands;
    for (int k = 0; k < 3; ++k) cands.insert("s" + std::to_string(src(rng)));
    CandidateSet cs{0, cands};
    bool has = false;
    for (const auto& e : t.entries) has |= cands.count(e.source_word) > 0;
    for (const auto& e : lex) has |= cands.count(e.source_word) > 0;
    if (!has) {
      EXPECT_THROW(pick_translation(cs, t, lex, f), NoTranslation);
      continue;
    }
    EXPECT_EQ(pick_translation(cs, t, lex, f), census_pick(cands, t, lex, f));
    std::map<std::string, std::int64_t> score;
    for (const auto& e : t.entries)
      if (cands.count(e.source_word)) score[e.target_word] += e.count;
    for (const auto& e : lex)
      if (cands.count(e.source_word)) score[e.target_word] += 1;
    std::int64_t top = 0;
    int at_top = 0;
    for (const auto& [w, s] : score) top = std::max(top, s);
    for (const auto& [w, s] : score) at_top += s == top;
    ties += at_top > 1;
  }
  EXPECT_GT(ties, 50);  // the tie-break chain was actually exercised
}

TEST(EditTranslatorTest, EndToEnd) {
  auto r = gato_fixture();
  auto p = translate_edit("gatoz", r);
  EXPECT_EQ(p.predicted, "cat");
  EXPECT_FALSE(p.fallback);
  EXPECT_EQ(p.method, Method::Edit);
  EXPECT_EQ(translate_edit("perro", r).predicted, "dog");
}

TEST(EditTranslatorTest, CopyThroughWhenNoTarget) {
  TranslationResources r;
  EditTranslator t({"abc", "abd"}, r);
  auto p = t.translate("abx");
  EXPECT_TRUE(p.fallback);
  EXPECT_EQ(p.predicted, "abx");
}

TEST(EditTranslatorTest, FartherWordsNeverChangeOutput) {
  auto r = gato_fixture();
  EditTranslator base({"gato", "gatos", "perro"}, r);
  EditTranslator more({"gato", "gatos", "perro", "zzzzzzzz", "gatoooo"}, r);
  for (std::string q : {"gatoz", "perrito", "gat", "xperro"}) EXPECT_EQ(base.translate(q), more.translate(q)) << q;
}

}  // namespace
}  // namespace oovt
