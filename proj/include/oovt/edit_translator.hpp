#pragma once

// Edit-distance OOV translation: retrieve every in-vocabulary source word at
// minimal Levenshtein distance, then emit the target word that aligns most
// often to any of them.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "oovt/corpus.hpp"
#include "oovt/errors.hpp"
#include "oovt/prediction.hpp"
#include "oovt/unicode.hpp"

namespace oovt {

/// Unit-cost Levenshtein distance over Unicode scalar values.
inline std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t up = row[j];
      row[j] = std::min({up + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

inline std::size_t levenshtein(std::string_view a, std::string_view b) {
  return levenshtein(std::u32string_view(unicode::decode(a)), std::u32string_view(unicode::decode(b)));
}

struct CandidateSet {
  std::size_t distance = 0;
  std::set<std::string> words;
};

namespace detail {
inline CandidateSet min_distance_scan(const std::u32string& q, const std::vector<std::string>& vocab,
                                      const std::vector<std::u32string>& decoded) {
  CandidateSet out;
  out.distance = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const auto& u = decoded[i];
    const std::size_t lower = u.size() > q.size() ? u.size() - q.size() : q.size() - u.size();
    if (lower > out.distance) continue;
    const std::size_t d = levenshtein(q, u);
    if (d < out.distance) {
      out.distance = d;
      out.words.clear();
    }
    if (d == out.distance) out.words.insert(vocab[i]);
  }
  return out;
}
}  // namespace detail

/// Every vocabulary word at the minimum distance from the query.
inline CandidateSet min_distance_candidates(std::string_view oov, const std::vector<std::string>& vocab) {
  if (vocab.empty()) throw DataError("empty candidate vocabulary");
  std::vector<std::u32string> decoded;
  decoded.reserve(vocab.size());
  for (const auto& w : vocab) decoded.push_back(unicode::decode(w));
  return detail::min_distance_scan(unicode::decode(oov), vocab, decoded);
}

/// Pooled alignment evidence per source word: table counts plus one pseudo-count
/// per lexicon entry.
class TargetScorer {
 public:
  TargetScorer(const TranslationTable& table, const Lexicon& lexicon, TargetFrequencyTable freq)
      : freq_(std::move(freq)) {
    for (const auto& e : table.entries) evidence_[e.source_word][e.target_word] += e.count;
    for (const auto& e : lexicon) evidence_[e.source_word][e.target_word] += 1;
  }

  bool has_targets(const std::string& source) const { return evidence_.count(source) > 0; }

  /// argmax of pooled score; ties by target frequency, then lexicographic order.
  std::string pick(const std::set<std::string>& candidates, std::string_view oov_for_error = {}) const {
    std::map<std::string, std::int64_t> score;
    for (const auto& w : candidates) {
      auto it = evidence_.find(w);
      if (it == evidence_.end()) continue;
      for (const auto& [t, c] : it->second) score[t] += c;
    }
    if (score.empty()) throw NoTranslation(std::string(oov_for_error));
    const std::string* best = nullptr;
    std::int64_t best_score = 0, best_freq = 0;
    for (const auto& [t, s] : score) {  // map order gives the lexicographic tie-break
      const std::int64_t f = freq_.lookup(t);
      if (!best || s > best_score || (s == best_score && f > best_freq)) {
        best = &t;
        best_score = s;
        best_freq = f;
      }
    }
    return *best;
  }

 private:
  std::unordered_map<std::string, std::map<std::string, std::int64_t>> evidence_;
  TargetFrequencyTable freq_;
};

inline std::string pick_translation(const CandidateSet& candidates, const TranslationTable& table,
                                    const Lexicon& lexicon, const TargetFrequencyTable& freq) {
  if (candidates.words.empty()) throw DataError("pick_translation: empty candidate set");
  return TargetScorer(table, lexicon, freq).pick(candidates.words);
}

/// Resources shared by the retrieval-based translators.
struct TranslationResources {
  Lexicon lexicon;
  TranslationTable table;
  TargetFrequencyTable frequencies;
};

class EditTranslator {
 public:
  /// Candidate vocabulary defaults to lexicon ∪ table source words.
  explicit EditTranslator(const TranslationResources& res)
      : EditTranslator(source_vocabulary(res.lexicon, res.table), res) {}

  EditTranslator(std::vector<std::string> vocab, const TranslationResources& res)
      : vocab_(std::move(vocab)), scorer_(res.table, res.lexicon, res.frequencies) {
    if (vocab_.empty()) throw DataError("edit translator: empty vocabulary");
    decoded_.reserve(vocab_.size());
    for (const auto& w : vocab_) decoded_.push_back(unicode::decode(w));
  }

  CandidateSet candidates(std::string_view oov) const {
    return detail::min_distance_scan(unicode::decode(oov), vocab_, decoded_);
  }

  Prediction translate(const std::string& oov) const {
    Prediction p{oov, oov, "", Method::Edit, false};
    try {
      p.predicted = scorer_.pick(candidates(oov).words, oov);
    } catch (const NoTranslation&) {
      p.fallback = true;
    }
    return p;
  }

  const std::vector<std::string>& vocabulary() const { return vocab_; }

 private:
  std::vector<std::string> vocab_;
  std::vector<std::u32string> decoded_;
  TargetScorer scorer_;
};

inline Prediction translate_edit(const std::string& oov, const TranslationResources& res) {
  return EditTranslator(res).translate(oov);
}

}  // namespace oovt
