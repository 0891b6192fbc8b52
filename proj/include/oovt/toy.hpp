#pragma once

// Synthetic language pair used as an offline fixture.
//
// Target words are plain English. Source words are derived from them by a
// fixed set of spelling changes plus part-of-speech endings, so the mapping is
// learnable character by character:
//   nouns       cat -> kato,  plural katoz -> cats
//   verbs       walk -> valkar, valketi -> walked, valkando -> walking, valke -> walks
//   adjectives  cold -> kolda, koldior -> colder, koldisim -> coldest
// Rare forms occur exactly once in the parallel text and become OOV candidates:
// inflections, misspellings of frequent words, noun compounds, loanwords and
// personal or place names.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "oovt/corpus.hpp"
#include "oovt/evaluation.hpp"
#include "oovt/text.hpp"

namespace oovt::toy {

inline const std::vector<std::string> kNouns = {
    "cat",    "dog",    "house",  "river",  "tree",   "stone",  "bird",   "fish",   "horse",  "road",
    "field",  "window", "door",   "table",  "chair",  "book",   "letter", "garden", "mountain", "forest",
    "flower", "fire",   "night",  "island", "bridge", "tower",  "market", "friend", "mother", "father",
    "sister", "brother", "teacher", "farmer", "doctor", "soldier", "king",  "queen",  "ship",   "boat",
    "train",  "wall",   "street", "village", "cloud", "star",   "lake",   "song",   "word",   "hand",
    "apple",  "baker",  "basket", "bell",   "blanket", "bottle", "bucket", "candle", "carpet", "castle",
    "coat",   "corner", "cup",    "desk",   "dinner", "drum",   "egg",    "farm",   "feather", "flag",
    "floor",  "gate",   "hammer", "hill",   "hunter", "jacket", "kettle", "kitchen", "ladder", "lamp",
    "lemon",  "lion",   "mirror", "monkey", "nest",   "ocean",  "onion",  "pencil", "pillow", "pocket",
    "rabbit", "ring",   "rock",   "roof",   "sailor", "school", "shell",  "snake",  "spoon",  "tiger"};

inline const std::vector<std::string> kVerbs = {"walk",  "talk",  "jump",  "open",  "paint", "play",
                                                "visit", "call",  "help",  "cook",  "climb", "clean",
                                                "listen", "work", "look",  "kill",  "want",  "plant",
                                                "start", "turn",  "rain",  "pull",  "fill",  "answer",
                                                "ask",   "borrow", "follow", "hunt", "kick",  "land",
                                                "learn", "mark",  "melt",  "order", "pick",  "point",
                                                "print", "rest",  "return", "shout", "sign", "smell",
                                                "test",  "thank", "wait",  "warn",  "lift",  "count"};

inline const std::vector<std::string> kAdjectives = {"old",  "young", "cold",  "warm",  "dark",  "quick",
                                                     "slow", "rich",  "poor",  "tall",  "short", "soft",
                                                     "hard", "deep",  "bright", "small", "cheap", "fast",
                                                     "kind", "loud",  "neat",  "fresh", "long",  "smooth",
                                                     "sweet", "thick", "high", "green", "low",   "wild"};

inline const std::vector<std::pair<std::string, std::string>> kCompounds = {
    {"fire", "boat"},   {"river", "boat"},  {"tree", "house"}, {"star", "light"},  {"stone", "wall"},
    {"book", "market"}, {"fish", "market"}, {"sea", "bird"},   {"rain", "cloud"},  {"horse", "road"},
    {"night", "bird"},  {"flower", "garden"}};

inline const std::vector<std::string> kLoanwords = {"telephone", "computer", "radio",  "camera",   "piano",
                                                    "hotel",     "taxi",     "chocolate", "coffee", "television",
                                                    "photograph", "guitar",  "museum", "theater"};

inline const std::vector<std::string> kRareNames = {"Kafka", "Oslo",  "Tokyo",  "Nairobi", "Lima",   "Pedro",
                                                    "Anika", "Kyoto", "Bogota", "Tariq",   "Helsinki", "Marisol"};
inline const std::vector<std::string> kFrequentNames = {"Maria", "Berlin", "Anna",  "Roma",   "Omar",  "Paris",
                                                        "Lisbon", "Elena", "Madrid", "Kenji", "Dublin", "Sofia",
                                                        "Hugo",  "Vienna", "Laila", "Cairo",  "Boris", "Quito"};

// Function words: source -> target.
inline const std::vector<std::pair<std::string, std::string>> kFunctionWords = {
    {"la", "the"}, {"un", "a"}, {"e", "and"}, {"en", "in"}, {"de", "of"}, {"kon", "with"}};

/// Spelling changes from target to source orthography, longest match first.
inline std::string respell(const std::string& t) {
  static const std::vector<std::pair<std::string, std::string>> rules = {
      {"th", "z"}, {"sh", "x"}, {"ch", "c"}, {"ck", "k"}, {"ph", "f"}, {"qu", "kw"}, {"ee", "i"},
      {"oo", "u"}, {"c", "k"},  {"w", "v"},  {"y", "i"}};
  std::string out;
  std::size_t i = 0;
  while (i < t.size()) {
    bool hit = false;
    for (const auto& [from, to] : rules)
      if (t.compare(i, from.size(), from) == 0) {
        out += to;
        i += from.size();
        hit = true;
        break;
      }
    if (!hit) out += t[i++];
  }
  return out;
}

inline bool is_vowel(char c) { return std::string_view("aeiou").find(c) != std::string_view::npos; }

inline std::string noun_stem(const std::string& t) {
  std::string s = respell(t);
  return is_vowel(s.back()) ? s : s + "o";
}

struct Form {
  std::string source;
  std::string target;
  std::string pos;
  bool lexicon = false;  // base forms carry lexicon entries
  bool rare = false;     // occurs exactly once in the parallel text
  std::optional<OOVCategory> category;
};

struct Fixture {
  Lexicon lexicon;
  std::vector<AlignedSentencePair> parallel;
  std::vector<std::vector<std::string>> monolingual;
  std::map<std::string, std::int64_t> target_frequencies;
  std::map<std::string, OOVCategory> categories;  // every rare source form
};

namespace detail {

inline std::string misspell(const std::string& w, std::mt19937_64& rng) {
  std::string s = w;
  const std::size_t kind = rng() % 3;
  const std::size_t i = 1 + rng() % (s.size() - 2);  // keep first and last characters
  if (kind == 0) {
    std::swap(s[i], s[i + 1]);
  } else if (kind == 1) {
    s.erase(i, 1);
  } else {
    s.insert(i, 1, s[i]);
  }
  return s;
}

}  // namespace detail

/// Deterministic in the seed.
inline Fixture generate(std::uint64_t seed = 1, std::size_t monolingual_sentences = 200) {
  std::mt19937_64 rng(seed);
  std::vector<Form> forms;
  std::set<std::string> taken;
  auto try_add = [&](Form f) {
    if (!taken.insert(f.source).second) return false;
    forms.push_back(std::move(f));
    return true;
  };
  auto add = [&](Form f) {
    const std::string src = f.source;
    if (!try_add(std::move(f))) throw std::logic_error("toy fixture: duplicate source form '" + src + "'");
  };
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto inflection = [&](std::string src, std::string tgt, const std::string& pos) {
    const bool rare = u01(rng) < 0.45;
    add({std::move(src), std::move(tgt), pos, false, rare,
         rare ? std::optional(OOVCategory::MorphologicalVariation) : std::nullopt});
  };

  for (const auto& n : kNouns) {
    const std::string s = noun_stem(n);
    add({s, n, "NOUN", true, false, std::nullopt});
    inflection(s + "z", n + "s", "NOUN");
  }
  for (const auto& v : kVerbs) {
    const std::string s = respell(v);
    add({s + "ar", v, "VERB", true, false, std::nullopt});
    inflection(s + "eti", v + "ed", "VERB");
    inflection(s + "ando", v + "ing", "VERB");
    inflection(s + "e", v + "s", "VERB");
  }
  for (const auto& a : kAdjectives) {
    const std::string s = respell(a);
    add({s + "a", a, "ADJ", true, false, std::nullopt});
    inflection(s + "ior", a + "er", "ADJ");
    inflection(s + "isim", a + "est", "ADJ");
  }
  for (const auto& [a, b] : kCompounds)
    add({noun_stem(a) + noun_stem(b), a + b, "NOUN", false, true, OOVCategory::Compounding});
  for (const auto& w : kLoanwords) {
    std::string s = respell(w);
    if (s.back() == 'e') s.pop_back();
    add({s, w, "NOUN", false, true, OOVCategory::Transliteration});
  }
  for (const auto& n : kRareNames) add({n, n, "PROPN", false, true, OOVCategory::ProperNoun});
  for (const auto& n : kFrequentNames) add({n, n, "PROPN", false, false, std::nullopt});

  // Misspellings of frequent words.
  std::vector<std::size_t> frequent;
  for (std::size_t i = 0; i < forms.size(); ++i)
    if (!forms[i].rare && forms[i].pos != "PROPN" && forms[i].source.size() >= 4) frequent.push_back(i);
  std::size_t typos = 0;
  while (typos < 26) {
    const Form& base = forms[frequent[rng() % frequent.size()]];
    Form f{detail::misspell(base.source, rng), base.target, base.pos, false, true, OOVCategory::Misspelling};
    typos += try_add(std::move(f));
  }

  // Token bag for the parallel text.
  std::vector<std::size_t> bag;
  for (std::size_t i = 0; i < forms.size(); ++i) {
    std::size_t count = forms[i].rare ? 1 : (forms[i].lexicon ? 3 + rng() % 6 : 2 + rng() % 5);
    bag.insert(bag.end(), count, i);
  }
  std::shuffle(bag.begin(), bag.end(), rng);

  Fixture fx;
  auto sentence = [&](const std::vector<std::size_t>& content) {
    AlignedSentencePair p;
    for (std::size_t idx : content) {
      if (rng() % 3 == 0) {
        const auto& [fs, ft] = kFunctionWords[rng() % kFunctionWords.size()];
        p.links.insert({p.source_tokens.size(), p.target_tokens.size()});
        p.source_tokens.push_back(fs);
        p.target_tokens.push_back(ft);
      }
      p.links.insert({p.source_tokens.size(), p.target_tokens.size()});
      p.source_tokens.push_back(forms[idx].source);
      p.target_tokens.push_back(forms[idx].target);
    }
    return p;
  };
  for (std::size_t start = 0; start < bag.size();) {
    const std::size_t len = std::min<std::size_t>(3 + rng() % 5, bag.size() - start);
    fx.parallel.push_back(
        sentence(std::vector<std::size_t>(bag.begin() + static_cast<std::ptrdiff_t>(start),
                                          bag.begin() + static_cast<std::ptrdiff_t>(start + len))));
    start += len;
  }

  // Monolingual source text: every form can appear, frequent forms more often.
  std::vector<double> weight;
  for (const auto& f : forms) weight.push_back(f.rare ? 0.5 : (f.lexicon ? 4.0 : 2.0));
  std::discrete_distribution<std::size_t> pick(weight.begin(), weight.end());
  for (std::size_t s = 0; s < monolingual_sentences; ++s) {
    std::vector<std::size_t> content;
    for (std::size_t k = 4 + rng() % 6; k > 0; --k) content.push_back(pick(rng));
    fx.monolingual.push_back(sentence(content).source_tokens);
  }

  for (const auto& f : forms) {
    if (f.lexicon) fx.lexicon.push_back({f.source, f.pos, f.target});
    if (f.category) fx.categories[f.source] = *f.category;
  }
  for (const auto& p : fx.parallel)
    for (const auto& t : p.target_tokens) fx.target_frequencies[t] += 100;
  for (const auto& [s, t] : kFunctionWords) fx.target_frequencies[t] += 10000;
  return fx;
}

struct FixturePaths {
  std::filesystem::path lexicon, source, target, alignment, monolingual, target_frequencies, categories, config;
};

inline FixturePaths fixture_paths(const std::filesystem::path& dir) {
  return {dir / "lexicon.tsv",      dir / "parallel.src",       dir / "parallel.tgt",
          dir / "parallel.align",   dir / "monolingual.txt",    dir / "target_freq.tsv",
          dir / "categories.tsv",   dir / "config.json"};
}

/// Writes the fixture files plus a pipeline config pointing at them.
inline FixturePaths write_fixture(const std::filesystem::path& dir, std::uint64_t seed = 1) {
  std::filesystem::create_directories(dir);
  const Fixture fx = generate(seed);
  const FixturePaths p = fixture_paths(dir);
  write_lexicon(fx.lexicon, p.lexicon);
  write_parallel(fx.parallel, p.source, p.target, p.alignment);
  {
    text::AtomicFile f(p.monolingual);
    for (const auto& s : fx.monolingual) f.stream() << text::join(s, " ") << '\n';
    f.commit();
  }
  {
    text::AtomicFile f(p.target_frequencies);
    for (const auto& [t, c] : fx.target_frequencies) f.stream() << t << '\t' << c << '\n';
    f.commit();
  }
  write_annotations(fx.categories, p.categories);
  {
    text::AtomicFile f(p.config);
    f.stream() << R"({
  "lexicon": "lexicon.tsv",
  "parallel": {
    "source": "parallel.src",
    "target": "parallel.tgt",
    "alignment": "parallel.align"
  },
  "monolingual": "monolingual.txt",
  "target_frequencies": "target_freq.tsv",
  "categories": "categories.tsv",
  "dataset": { "n_total": 120, "n_validation": 60, "seed": )"
               << seed << R"( },
  "embeddings": { "dim": 50, "epochs": 10, "bucket_count": 16384 },
  "methods": ["edit", "vector", "seq2seq"]
}
)";
    f.commit();
  }
  return p;
}

}  // namespace oovt::toy
