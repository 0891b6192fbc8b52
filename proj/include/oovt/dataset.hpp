#pragma once

// Intrinsic OOV evaluation sets: one-count aligned source tokens absent from
// the lexicon, sampled and split into validation and test, then censored from
// every training resource.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oovt/corpus.hpp"
#include "oovt/errors.hpp"
#include "oovt/log.hpp"
#include "oovt/text.hpp"

namespace oovt {

struct OOVPair {
  std::string source_word;
  std::string gold_target;          // single reference, possibly multiword
  std::size_t sentence_index = 0;   // 0-based; written as a 1-based line number

  auto operator<=>(const OOVPair&) const = default;
};

struct DatasetSplit {
  std::vector<OOVPair> validation;
  std::vector<OOVPair> test;
  std::uint64_t seed = 0;

  /// Every sampled pair, i.e. everything that must be censored from training resources.
  std::vector<OOVPair> removed() const {
    std::vector<OOVPair> all = validation;
    all.insert(all.end(), test.begin(), test.end());
    return all;
  }
  std::set<std::string> source_words() const {
    std::set<std::string> s;
    for (const auto& p : validation) s.insert(p.source_word);
    for (const auto& p : test) s.insert(p.source_word);
    return s;
  }
};

/// Source tokens that take part in links at exactly one position of the whole
/// corpus and have no lexicon entry. The gold target joins the tokens linked
/// from that position in target order. Result is sorted by source word.
inline std::vector<OOVPair> extract_oov_candidates(const std::vector<AlignedSentencePair>& pairs,
                                                   const Lexicon& lexicon) {
  struct Occurrence {
    std::size_t count = 0;
    std::size_t sentence = 0;
    std::size_t position = 0;
  };
  std::map<std::string, Occurrence> occ;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    std::set<std::size_t> linked_positions;
    for (const auto& l : pairs[k].links) linked_positions.insert(l.source);
    for (std::size_t pos : linked_positions) {
      auto& o = occ[pairs[k].source_tokens[pos]];
      if (o.count++ == 0) {
        o.sentence = k;
        o.position = pos;
      }
    }
  }
  std::set<std::string> in_lexicon;
  for (const auto& e : lexicon) in_lexicon.insert(e.source_word);

  std::vector<OOVPair> out;
  for (const auto& [word, o] : occ) {
    if (o.count != 1 || in_lexicon.count(word)) continue;
    const auto& p = pairs[o.sentence];
    std::vector<std::string> targets;
    for (const auto& l : p.links)  // std::set<Link> orders by (source, target)
      if (l.source == o.position) targets.push_back(p.target_tokens[l.target]);
    out.push_back({word, text::join(targets, " "), o.sentence});
  }
  if (out.empty()) log::warn("no OOV candidates found");
  return out;
}

/// Uniformly samples min(n_total, |pool|) candidates without replacement and
/// splits them. When the pool is short, the validation share is scaled by
/// floor(sampled * n_validation / n_total).
inline DatasetSplit sample_and_split(std::vector<OOVPair> candidates, std::size_t n_total, std::size_t n_validation,
                                     std::uint64_t seed) {
  if (n_validation > n_total) throw UsageError("n_validation must not exceed n_total");
  if (candidates.empty()) throw DataError("empty OOV candidate pool");
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  const std::size_t k = std::min(n_total, candidates.size());
  std::size_t n_val = n_validation;
  if (k < n_total) {
    n_val = static_cast<std::size_t>((static_cast<unsigned __int128>(k) * n_validation) / n_total);
    log::warn("candidate pool has " + std::to_string(candidates.size()) + " pairs, fewer than n_total=" +
              std::to_string(n_total) + "; scaling split to " + std::to_string(n_val) + "/" +
              std::to_string(k - n_val));
  }

  // Partial Fisher-Yates over the canonical (sorted) pool.
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, candidates.size() - 1);
    std::swap(candidates[i], candidates[pick(rng)]);
  }
  DatasetSplit split;
  split.seed = seed;
  split.validation.assign(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n_val));
  split.test.assign(candidates.begin() + static_cast<std::ptrdiff_t>(n_val),
                    candidates.begin() + static_cast<std::ptrdiff_t>(k));
  return split;
}

struct CensoredResources {
  TranslationTable table;
  std::vector<AlignedSentencePair> pairs;
};

/// Drops every table entry and alignment link whose source token is a split word.
/// Sentences themselves are kept.
inline CensoredResources censor_resources(const DatasetSplit& split, const TranslationTable& table,
                                          const std::vector<AlignedSentencePair>& pairs) {
  const auto words = split.source_words();
  CensoredResources out;
  for (const auto& e : table.entries)
    if (!words.count(e.source_word)) out.table.entries.push_back(e);
  out.pairs = pairs;
  for (auto& p : out.pairs)
    std::erase_if(p.links, [&](const Link& l) { return words.count(p.source_tokens[l.source]) > 0; });
  return out;
}

inline void write_split_file(const std::vector<OOVPair>& pairs, const std::filesystem::path& path) {
  text::AtomicFile f(path);
  for (const auto& p : pairs) f.stream() << p.source_word << '\t' << p.gold_target << '\t' << p.sentence_index + 1 << '\n';
  f.commit();
}

inline std::vector<OOVPair> load_split_file(const std::filesystem::path& path) {
  const std::string ps = path.string();
  std::vector<OOVPair> out;
  auto lines = text::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::is_blank(lines[i])) continue;
    auto f = text::split(lines[i], '\t');
    if (f.size() != 3) throw DataError(ps, i + 1, "expected 3 tab-separated fields");
    auto line = text::parse_int(f[2]);
    if (!line || *line < 1) throw DataError(ps, i + 1, "provenance line must be a positive integer");
    out.push_back({detail::normalized_field(f[0], ps, i + 1, "source word"),
                   detail::normalize_phrase(f[1], ps, i + 1, "gold target"),
                   static_cast<std::size_t>(*line - 1)});
  }
  return out;
}

}  // namespace oovt
