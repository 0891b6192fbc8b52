#pragma once

// Vector-distance OOV translation: the in-vocabulary source word whose subword
// embedding is cosine-nearest to the OOV's is treated like an edit-distance
// candidate and resolved through the same alignment census.

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "oovt/edit_translator.hpp"
#include "oovt/subword_embeddings.hpp"

namespace oovt {

class VectorTranslator {
 public:
  static constexpr double kTieTolerance = 1e-9;

  VectorTranslator(SubwordEmbeddingModel model, const TranslationResources& res)
      : VectorTranslator(std::move(model), source_vocabulary(res.lexicon, res.table), res) {}

  VectorTranslator(SubwordEmbeddingModel model, std::vector<std::string> vocab, const TranslationResources& res)
      : model_(std::move(model)), vocab_(std::move(vocab)), scorer_(res.table, res.lexicon, res.frequencies) {
    if (vocab_.empty()) throw DataError("vector translator: empty vocabulary");
    for (const auto& w : vocab_) embedded_.push_back(model_.embed(w));
  }

  /// Vocabulary words whose cosine to the OOV is within kTieTolerance of the maximum.
  /// A zero vector on either side scores 0.
  CandidateSet candidates(const std::string& oov) const {
    const auto q = model_.embed(oov);
    std::vector<double> sims(vocab_.size());
    double best = -2.0;
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
      sims[i] = similarity(q, embedded_[i]);
      best = std::max(best, sims[i]);
    }
    CandidateSet out;
    for (std::size_t i = 0; i < vocab_.size(); ++i)
      if (sims[i] >= best - kTieTolerance) out.words.insert(vocab_[i]);
    return out;
  }

  Prediction translate(const std::string& oov) const {
    Prediction p{oov, oov, "", Method::Vector, false};
    try {
      p.predicted = scorer_.pick(candidates(oov).words, oov);
    } catch (const NoTranslation&) {
      p.fallback = true;
    }
    return p;
  }

  const SubwordEmbeddingModel& model() const { return model_; }

 private:
  static double similarity(const std::vector<float>& a, const std::vector<float>& b) {
    try {
      return cosine(std::span<const float>(a), std::span<const float>(b));
    } catch (const UsageError&) {
      return 0.0;
    }
  }

  SubwordEmbeddingModel model_;
  std::vector<std::string> vocab_;
  std::vector<std::vector<float>> embedded_;
  TargetScorer scorer_;
};

inline Prediction translate_vector(const std::string& oov, const SubwordEmbeddingModel& model,
                                   const std::vector<std::string>& vocab, const TranslationResources& res) {
  return VectorTranslator(model, vocab, res).translate(oov);
}

}  // namespace oovt
