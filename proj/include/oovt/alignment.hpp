#pragma once

// IBM Model 1 word alignment trained with EM, followed by Viterbi link
// extraction. Small-scale replacement for an external aligner; its output feeds
// derive_translation_table exactly as externally aligned data would.

#include <cmath>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "oovt/corpus.hpp"
#include "oovt/errors.hpp"

namespace oovt {

using Bitext = std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>>;

/// Lexical translation probabilities t(target | source) over integer ids.
class Ibm1Model {
 public:
  explicit Ibm1Model(const Bitext& corpus) {
    if (corpus.empty()) throw DataError("cannot align an empty corpus");
    sentences_.reserve(corpus.size());
    for (std::size_t k = 0; k < corpus.size(); ++k) {
      const auto& [src, tgt] = corpus[k];
      if (src.empty() || tgt.empty()) throw DataError("sentence pair " + std::to_string(k + 1) + " is empty");
      Sentence s;
      for (const auto& w : src) s.source.push_back(intern(source_ids_, source_words_, w));
      for (const auto& w : tgt) s.target.push_back(intern(target_ids_, target_words_, w));
      sentences_.push_back(std::move(s));
    }
    table_.assign(source_words_.size(), {});
    const double init = 1.0 / static_cast<double>(target_words_.size());
    for (const auto& s : sentences_)
      for (int f : s.source)
        for (int e : s.target) table_[f].emplace(e, init);
  }

  /// One EM iteration. Returns the corpus log-likelihood under the parameters
  /// in effect before the update.
  double iterate() {
    std::vector<std::unordered_map<int, double>> counts(table_.size());
    std::vector<double> totals(table_.size(), 0.0);
    double ll = 0.0;
    std::vector<double> row;
    for (const auto& s : sentences_) {
      for (int e : s.target) {
        row.resize(s.source.size());
        double z = 0.0;
        for (std::size_t i = 0; i < s.source.size(); ++i) {
          row[i] = table_[s.source[i]].at(e);
          z += row[i];
        }
        ll += std::log(z / static_cast<double>(s.source.size()));
        for (std::size_t i = 0; i < s.source.size(); ++i) {
          double post = row[i] / z;
          counts[s.source[i]][e] += post;
          totals[s.source[i]] += post;
        }
      }
    }
    for (std::size_t f = 0; f < table_.size(); ++f)
      for (auto& [e, p] : table_[f]) {
        auto it = counts[f].find(e);
        p = it == counts[f].end() ? 0.0 : it->second / totals[f];
      }
    return ll;
  }

  double log_likelihood() const {
    double ll = 0.0;
    for (const auto& s : sentences_)
      for (int e : s.target) {
        double z = 0.0;
        for (int f : s.source) z += table_[f].at(e);
        ll += std::log(z / static_cast<double>(s.source.size()));
      }
    return ll;
  }

  /// t(target | source); 0 for pairs that never co-occur.
  double prob(const std::string& source, const std::string& target) const {
    auto fs = source_ids_.find(source);
    auto es = target_ids_.find(target);
    if (fs == source_ids_.end() || es == target_ids_.end()) return 0.0;
    auto it = table_[fs->second].find(es->second);
    return it == table_[fs->second].end() ? 0.0 : it->second;
  }

  /// Links every target token to its most probable source token (lowest index on ties).
  std::vector<AlignedSentencePair> viterbi(const Bitext& corpus) const {
    std::vector<AlignedSentencePair> out;
    out.reserve(corpus.size());
    for (std::size_t k = 0; k < corpus.size(); ++k) {
      const auto& s = sentences_[k];
      AlignedSentencePair p{corpus[k].first, corpus[k].second, {}};
      for (std::size_t j = 0; j < s.target.size(); ++j) {
        std::size_t best = 0;
        double best_p = -1.0;
        for (std::size_t i = 0; i < s.source.size(); ++i) {
          double pr = table_[s.source[i]].at(s.target[j]);
          if (pr > best_p) {
            best_p = pr;
            best = i;
          }
        }
        p.links.insert({best, j});
      }
      out.push_back(std::move(p));
    }
    return out;
  }

 private:
  struct Sentence {
    std::vector<int> source;
    std::vector<int> target;
  };

  static int intern(std::unordered_map<std::string, int>& ids, std::vector<std::string>& words,
                    const std::string& w) {
    auto [it, inserted] = ids.emplace(w, static_cast<int>(words.size()));
    if (inserted) words.push_back(w);
    return it->second;
  }

  std::vector<Sentence> sentences_;
  std::unordered_map<std::string, int> source_ids_, target_ids_;
  std::vector<std::string> source_words_, target_words_;
  std::vector<std::unordered_map<int, double>> table_;
};

struct Ibm1Result {
  std::vector<AlignedSentencePair> pairs;
  TranslationTable table;
  /// log_likelihood[k] is the corpus log-likelihood after k EM iterations.
  std::vector<double> log_likelihood;
  Ibm1Model model;
};

inline Ibm1Result align_ibm1(const Bitext& corpus, int iterations = 10) {
  if (iterations < 1) throw UsageError("align_ibm1: iterations must be >= 1");
  Ibm1Model model(corpus);
  std::vector<double> ll;
  for (int it = 0; it < iterations; ++it) ll.push_back(model.iterate());
  ll.push_back(model.log_likelihood());
  auto pairs = model.viterbi(corpus);
  auto table = derive_translation_table(pairs);
  return {std::move(pairs), std::move(table), std::move(ll), std::move(model)};
}

}  // namespace oovt
