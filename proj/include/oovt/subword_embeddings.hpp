#pragma once

// Subword skip-gram embeddings with negative sampling. A word's input vector
// is the mean of its own vector and the hashed vectors of its character
// n-grams, so any non-empty string can be embedded.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "oovt/binary_io.hpp"
#include "oovt/corpus.hpp"
#include "oovt/errors.hpp"
#include "oovt/log.hpp"
#include "oovt/unicode.hpp"

namespace oovt {

struct EmbeddingTrainConfig {
  int dim = 100;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  double initial_lr = 0.05;  // decayed linearly to 0 over the run
  int min_word_count = 1;
  int n_min = 3;
  int n_max = 6;
  std::uint32_t bucket_count = 1u << 16;
  std::uint64_t seed = 1;

  void validate() const {
    if (dim <= 0 || window <= 0 || negatives <= 0 || epochs <= 0 || min_word_count <= 0 || bucket_count == 0)
      throw UsageError("embedding config: sizes and counts must be positive");
    if (!(initial_lr > 0)) throw UsageError("embedding config: learning rate must be positive");
    if (n_min <= 0 || n_min > n_max) throw UsageError("embedding config: need 0 < n_min <= n_max");
  }
};

/// Contiguous substrings of "<word>" with n_min..n_max scalar values, in
/// position order, followed by the whole wrapped word as the final element.
inline std::vector<std::string> extract_ngrams(std::string_view word, int n_min, int n_max) {
  if (word.empty()) throw UsageError("extract_ngrams: empty word");
  std::u32string w = U"<" + unicode::decode(word) + U">";
  const std::size_t L = w.size();
  std::vector<std::string> out;
  for (std::size_t start = 0; start < L; ++start)
    for (int n = n_min; n <= n_max && start + static_cast<std::size_t>(n) <= L; ++n)
      out.push_back(unicode::encode(std::u32string_view(w).substr(start, static_cast<std::size_t>(n))));
  out.push_back(unicode::encode(w));
  return out;
}

/// FNV-1a, 32 bit, over the UTF-8 bytes.
inline std::uint32_t fnv1a(std::string_view s) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : s) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

inline constexpr std::string_view kHashSpec = "fnv1a32-utf8";

class SubwordEmbeddingModel {
 public:
  SubwordEmbeddingModel() = default;
  SubwordEmbeddingModel(const EmbeddingTrainConfig& cfg, std::vector<std::string> vocab)
      : dim_(cfg.dim), n_min_(cfg.n_min), n_max_(cfg.n_max), bucket_count_(cfg.bucket_count), seed_(cfg.seed),
        hash_spec_(kHashSpec), vocab_(std::move(vocab)) {
    index_vocab();
    word_vectors_.assign(vocab_.size() * static_cast<std::size_t>(dim_), 0.0f);
    bucket_vectors_.assign(static_cast<std::size_t>(bucket_count_) * static_cast<std::size_t>(dim_), 0.0f);
  }

  int dim() const { return dim_; }
  int n_min() const { return n_min_; }
  int n_max() const { return n_max_; }
  std::uint32_t bucket_count() const { return bucket_count_; }
  std::uint64_t seed() const { return seed_; }
  const std::string& hash_spec() const { return hash_spec_; }
  const std::vector<std::string>& vocabulary() const { return vocab_; }

  std::optional<std::size_t> word_id(const std::string& w) const {
    auto it = ids_.find(w);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  std::uint32_t bucket(std::string_view ngram) const { return fnv1a(ngram) % bucket_count_; }

  float* word_vector(std::size_t id) { return word_vectors_.data() + id * static_cast<std::size_t>(dim_); }
  const float* word_vector(std::size_t id) const { return word_vectors_.data() + id * static_cast<std::size_t>(dim_); }
  float* bucket_vector(std::uint32_t b) { return bucket_vectors_.data() + static_cast<std::size_t>(b) * static_cast<std::size_t>(dim_); }
  const float* bucket_vector(std::uint32_t b) const {
    return bucket_vectors_.data() + static_cast<std::size_t>(b) * static_cast<std::size_t>(dim_);
  }

  /// Input components of a string: bucket ids of its proper n-grams, and
  /// either its word id (in vocabulary) or the bucket of the whole wrapped word.
  struct Components {
    std::vector<std::uint32_t> buckets;
    std::optional<std::size_t> word;
  };

  Components components(std::string_view s) const {
    auto grams = extract_ngrams(s, n_min_, n_max_);
    Components c;
    c.word = word_id(std::string(s));
    for (std::size_t i = 0; i + 1 < grams.size(); ++i) c.buckets.push_back(bucket(grams[i]));
    if (!c.word) c.buckets.push_back(bucket(grams.back()));
    return c;
  }

  std::vector<float> compose(const Components& c) const {
    std::vector<float> v(static_cast<std::size_t>(dim_), 0.0f);
    std::size_t n = 0;
    auto add = [&](const float* src) {
      for (int k = 0; k < dim_; ++k) v[static_cast<std::size_t>(k)] += src[k];
      ++n;
    };
    if (c.word) add(word_vector(*c.word));
    for (auto b : c.buckets) add(bucket_vector(b));
    const float inv = 1.0f / static_cast<float>(n);
    for (auto& x : v) x *= inv;
    return v;
  }

  /// Defined for every non-empty string, including strings never seen in training.
  std::vector<float> embed(std::string_view s) const {
    if (s.empty()) throw UsageError("embed_string: empty string");
    return compose(components(s));
  }

  void save(const std::filesystem::path& path) const {
    text::AtomicFile f(path);
    binary::Writer w(f.stream());
    w.magic("OOVT-SUBWORD-EMB", kFormatVersion);
    w.str(hash_spec_);
    w.u32(static_cast<std::uint32_t>(dim_));
    w.u32(static_cast<std::uint32_t>(n_min_));
    w.u32(static_cast<std::uint32_t>(n_max_));
    w.u32(bucket_count_);
    w.u64(seed_);
    w.u64(vocab_.size());
    for (const auto& s : vocab_) w.str(s);
    w.array(word_vectors_);
    w.array(bucket_vectors_);
    f.commit();
  }

  static SubwordEmbeddingModel load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file: " + path.string());
    binary::Reader r(in, path.string());
    if (auto v = r.magic("OOVT-SUBWORD-EMB"); v != kFormatVersion)
      throw DataError(path.string() + ": unsupported embedding model version " + std::to_string(v));
    SubwordEmbeddingModel m;
    m.hash_spec_ = r.str();
    if (m.hash_spec_ != kHashSpec) throw DataError(path.string() + ": unknown hash function '" + m.hash_spec_ + "'");
    m.dim_ = static_cast<int>(r.u32());
    m.n_min_ = static_cast<int>(r.u32());
    m.n_max_ = static_cast<int>(r.u32());
    m.bucket_count_ = r.u32();
    m.seed_ = r.u64();
    const auto n = r.u64();
    for (std::uint64_t i = 0; i < n; ++i) m.vocab_.push_back(r.str());
    m.index_vocab();
    m.word_vectors_ = r.array<float>();
    m.bucket_vectors_ = r.array<float>();
    if (m.dim_ <= 0 || m.bucket_count_ == 0 || m.word_vectors_.size() != m.vocab_.size() * static_cast<std::size_t>(m.dim_) ||
        m.bucket_vectors_.size() != static_cast<std::size_t>(m.bucket_count_) * static_cast<std::size_t>(m.dim_))
      throw DataError(path.string() + ": inconsistent tensor sizes");
    return m;
  }

  friend bool operator==(const SubwordEmbeddingModel& a, const SubwordEmbeddingModel& b) {
    return a.dim_ == b.dim_ && a.n_min_ == b.n_min_ && a.n_max_ == b.n_max_ && a.bucket_count_ == b.bucket_count_ &&
           a.seed_ == b.seed_ && a.hash_spec_ == b.hash_spec_ && a.vocab_ == b.vocab_ &&
           a.word_vectors_ == b.word_vectors_ && a.bucket_vectors_ == b.bucket_vectors_;
  }

  std::vector<float>& raw_word_vectors() { return word_vectors_; }
  std::vector<float>& raw_bucket_vectors() { return bucket_vectors_; }
  const std::vector<float>& raw_word_vectors() const { return word_vectors_; }
  const std::vector<float>& raw_bucket_vectors() const { return bucket_vectors_; }

 private:
  static constexpr std::uint32_t kFormatVersion = 1;

  void index_vocab() {
    ids_.clear();
    for (std::size_t i = 0; i < vocab_.size(); ++i) ids_.emplace(vocab_[i], i);
  }

  int dim_ = 0;
  int n_min_ = 3;
  int n_max_ = 6;
  std::uint32_t bucket_count_ = 1;
  std::uint64_t seed_ = 0;
  std::string hash_spec_{kHashSpec};
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::size_t> ids_;
  std::vector<float> word_vectors_;
  std::vector<float> bucket_vectors_;
};

struct EmbeddingTrainResult {
  SubwordEmbeddingModel model;
  std::vector<double> epoch_loss;  // mean negative-sampling loss per (center, context) pair
};

inline EmbeddingTrainResult train_subword_embeddings(const MonolingualCorpus& corpus, const EmbeddingTrainConfig& cfg) {
  cfg.validate();
  std::vector<std::string> vocab;
  std::vector<double> unigram;
  for (const auto& [w, c] : corpus.token_counts)
    if (c >= cfg.min_word_count) {
      vocab.push_back(w);
      unigram.push_back(static_cast<double>(c));
    }
  if (vocab.empty()) throw DataError("monolingual corpus is empty after min_word_count filtering");

  SubwordEmbeddingModel model(cfg, vocab);
  const auto dim = static_cast<std::size_t>(cfg.dim);
  std::mt19937_64 rng(cfg.seed);
  {
    std::uniform_real_distribution<float> init(-1.0f / static_cast<float>(cfg.dim), 1.0f / static_cast<float>(cfg.dim));
    for (auto& x : model.raw_word_vectors()) x = init(rng);
    for (auto& x : model.raw_bucket_vectors()) x = init(rng);
  }
  std::vector<float> output(vocab.size() * dim, 0.0f);

  std::vector<std::vector<std::size_t>> sentences;
  std::size_t total_tokens = 0;
  for (const auto& s : corpus.sentences) {
    std::vector<std::size_t> ids;
    for (const auto& t : s)
      if (auto id = model.word_id(t)) ids.push_back(*id);
    total_tokens += ids.size();
    if (!ids.empty()) sentences.push_back(std::move(ids));
  }

  std::vector<SubwordEmbeddingModel::Components> comps;
  comps.reserve(vocab.size());
  for (const auto& w : vocab) comps.push_back(model.components(w));

  // Negative-sampling table, unigram^0.75.
  std::vector<std::size_t> neg_table;
  {
    const std::size_t table_size = std::max<std::size_t>(vocab.size() * 100, 100000);
    double z = 0;
    for (double c : unigram) z += std::pow(c, 0.75);
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      auto n = static_cast<std::size_t>(std::ceil(std::pow(unigram[i], 0.75) / z * static_cast<double>(table_size)));
      neg_table.insert(neg_table.end(), n, i);
    }
  }
  std::uniform_int_distribution<std::size_t> neg_pick(0, neg_table.size() - 1);

  auto sigmoid = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  std::vector<float> hidden(dim), grad(dim);
  EmbeddingTrainResult result;
  const double total_work = static_cast<double>(cfg.epochs) * static_cast<double>(total_tokens);
  std::size_t processed = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss_sum = 0;
    std::size_t n_pairs = 0;
    for (const auto& sent : sentences) {
      for (std::size_t pos = 0; pos < sent.size(); ++pos, ++processed) {
        const double lr = cfg.initial_lr * std::max(0.0, 1.0 - static_cast<double>(processed) / total_work);
        const auto& c = comps[sent[pos]];
        hidden = model.compose(c);
        const std::size_t lo = pos >= static_cast<std::size_t>(cfg.window) ? pos - static_cast<std::size_t>(cfg.window) : 0;
        const std::size_t hi = std::min(sent.size() - 1, pos + static_cast<std::size_t>(cfg.window));
        for (std::size_t ctx = lo; ctx <= hi; ++ctx) {
          if (ctx == pos) continue;
          std::fill(grad.begin(), grad.end(), 0.0f);
          auto step = [&](std::size_t target, bool positive) {
            float* u = output.data() + target * dim;
            double dot = 0;
            for (std::size_t k = 0; k < dim; ++k) dot += static_cast<double>(u[k]) * hidden[k];
            const double s = sigmoid(dot);
            loss_sum += positive ? -std::log(std::max(s, 1e-12)) : -std::log(std::max(1.0 - s, 1e-12));
            const auto g = static_cast<float>(lr * ((positive ? 1.0 : 0.0) - s));
            for (std::size_t k = 0; k < dim; ++k) {
              grad[k] += g * u[k];
              u[k] += g * hidden[k];
            }
          };
          step(sent[ctx], true);
          for (int k = 0; k < cfg.negatives; ++k) {
            std::size_t neg = neg_table[neg_pick(rng)];
            if (neg == sent[ctx]) {
              if (vocab.size() == 1) continue;
              while (neg == sent[ctx]) neg = neg_table[neg_pick(rng)];
            }
            step(neg, false);
          }
          ++n_pairs;
          if (c.word) {
            float* v = model.word_vector(*c.word);
            for (std::size_t k = 0; k < dim; ++k) v[k] += grad[k];
          }
          for (auto b : c.buckets) {
            float* v = model.bucket_vector(b);
            for (std::size_t k = 0; k < dim; ++k) v[k] += grad[k];
          }
          hidden = model.compose(c);
        }
      }
    }
    const double mean = n_pairs ? loss_sum / static_cast<double>(n_pairs) : 0.0;
    result.epoch_loss.push_back(mean);
    log::info("embeddings epoch " + std::to_string(epoch + 1) + " loss " + std::to_string(mean));
  }
  result.model = std::move(model);
  return result;
}

/// Cosine similarity, clamped to [-1, 1].
inline double cosine(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) throw UsageError("cosine: dimension mismatch");
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += static_cast<double>(u[i]) * v[i];
    nu += static_cast<double>(u[i]) * u[i];
    nv += static_cast<double>(v[i]) * v[i];
  }
  if (nu == 0 || nv == 0) throw UsageError("cosine: zero-norm vector");
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

inline double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw UsageError("cosine: dimension mismatch");
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0 || nv == 0) throw UsageError("cosine: zero-norm vector");
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

}  // namespace oovt
