#pragma once

// Frequency-weighted training of the character seq2seq model with Adam,
// validation exact-match early stopping and best-checkpoint selection, plus a
// finite-difference gradient checker and checkpoint I/O.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "oovt/binary_io.hpp"
#include "oovt/corpus.hpp"
#include "oovt/dataset.hpp"
#include "oovt/log.hpp"
#include "oovt/seq2seq/network.hpp"

namespace oovt::seq2seq {

struct WeightedPair {
  std::string source;
  std::string target;
  double weight;

  WeightedPair(std::string s, std::string t, double w) : source(std::move(s)), target(std::move(t)), weight(w) {
    if (source.empty() || target.empty()) throw DataError("weighted pair with empty string");
    if (!(weight > 0.0) || !std::isfinite(weight))
      throw DataError("weighted pair (" + source + ", " + target + ") must have a positive finite weight");
  }
};

inline constexpr double kLexiconWeight = 100.0;

/// One pair per table entry weighted by its alignment count, one per lexicon
/// entry with weight 100. Duplicates are kept as separate instances.
inline std::vector<WeightedPair> build_training_set(const TranslationTable& table, const Lexicon& lexicon) {
  if (table.empty() && lexicon.empty()) throw DataError("no training pairs: table and lexicon are both empty");
  std::vector<WeightedPair> out;
  for (const auto& e : table.entries)
    if (e.count > 0) out.emplace_back(e.source_word, e.target_word, static_cast<double>(e.count));
  for (const auto& e : lexicon) out.emplace_back(e.source_word, e.target_word, kLexiconWeight);
  return out;
}

class Adam {
 public:
  explicit Adam(const Parameters& like, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : m_(like.zeros_like()), v_(like.zeros_like()), lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {}

  void step(Parameters& params, const Parameters& grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.tensors.size(); ++k) {
      auto& m = m_.tensors[k];
      auto& v = v_.tensors[k];
      const auto& g = grads.tensors[k];
      m = b1_ * m + (1.0 - b1_) * g;
      v = b2_ * v + (1.0 - b2_) * g.cwiseProduct(g);
      params.tensors[k].array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
    }
  }

 private:
  Parameters m_, v_;
  double lr_, b1_, b2_, eps_;
  std::int64_t t_ = 0;
};

/// Validation quality. Exact match decides; mean cross-entropy only breaks ties.
struct ValidationScore {
  double exact_match = 0;
  double loss = 0;

  bool better_than(const ValidationScore& o) const {
    return exact_match > o.exact_match || (exact_match == o.exact_match && loss < o.loss);
  }
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0;  // weighted mean per-example loss
  double validation_exact_match = 0;
  double validation_loss = 0;
  bool improved = false;
};

inline std::string format_epoch_log(const EpochLog& e) {
  return "epoch " + std::to_string(e.epoch) + "\tloss " + text::format_double(e.train_loss) + "\tval_exact_match " +
         text::format_double(e.validation_exact_match) + "\tval_loss " + text::format_double(e.validation_loss);
}

struct TrainHooks {
  /// Replaces the built-in validation scoring when set.
  std::function<ValidationScore(const Network&, int epoch)> validation_metric;
  /// Called after every parameter update.
  std::function<void(std::int64_t update, const Parameters&)> on_update;
  std::function<void(const EpochLog&)> on_epoch;
};

struct TrainResult {
  Network model;  // best checkpoint
  std::vector<EpochLog> log;
  int best_epoch = 0;
  ValidationScore best_validation{-1.0, 0.0};
  std::int64_t updates = 0;
  std::vector<OOVPair> validation;
};

inline double exact_match(const Network& net, const std::vector<OOVPair>& validation) {
  if (validation.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& p : validation) hits += net.translate(p.source_word) == p.gold_target;
  return static_cast<double>(hits) / static_cast<double>(validation.size());
}

inline ValidationScore score_validation(const Network& net, const std::vector<OOVPair>& validation) {
  ValidationScore s;
  if (validation.empty()) return s;
  s.exact_match = exact_match(net, validation);
  for (const auto& p : validation)
    s.loss += net.forward_backward(net.encode_pair(p.source_word, p.gold_target, 1.0), 1.0, nullptr, nullptr);
  s.loss /= static_cast<double>(validation.size());
  return s;
}

namespace detail {
/// Seeded hold-out over the deduplicated (source, target) list. Every instance
/// of a held-out pair leaves the training set.
inline std::pair<std::vector<WeightedPair>, std::vector<OOVPair>> hold_out(const std::vector<WeightedPair>& pairs,
                                                                           double fraction, std::uint64_t seed) {
  std::vector<std::pair<std::string, std::string>> unique;
  for (const auto& p : pairs) unique.emplace_back(p.source, p.target);
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  if (unique.size() < 2) {
    std::vector<OOVPair> val;
    for (const auto& [s, t] : unique) val.push_back({s, t, 0});
    return {pairs, val};
  }
  auto n = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(unique.size())));
  n = std::clamp<std::size_t>(n, 1, unique.size() - 1);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::shuffle(unique.begin(), unique.end(), rng);
  std::set<std::pair<std::string, std::string>> held(unique.begin(), unique.begin() + static_cast<std::ptrdiff_t>(n));
  std::vector<WeightedPair> train;
  for (const auto& p : pairs)
    if (!held.count({p.source, p.target})) train.push_back(p);
  std::vector<OOVPair> val;
  for (const auto& [s, t] : held) val.push_back({s, t, 0});
  return {train, val};
}

inline void clip(Parameters& g, double max_norm) {
  const double n = std::sqrt(g.squared_norm());
  if (n > max_norm)
    for (auto& t : g.tensors) t *= max_norm / n;
}
}  // namespace detail

/// Minimizes the weighted per-character cross-entropy. Each batch's loss is
/// sum_i w_i L_i / sum_i w_i. Stops once patience_epochs epochs pass without a
/// validation improvement and returns the best checkpoint.
inline TrainResult train(const std::vector<WeightedPair>& pairs, std::vector<OOVPair> validation,
                         const Seq2SeqConfig& cfg, const TrainHooks& hooks = {}) {
  cfg.validate();
  if (pairs.empty()) throw DataError("seq2seq: empty training set");
  std::vector<WeightedPair> training = pairs;
  if (validation.empty()) {
    std::tie(training, validation) = detail::hold_out(pairs, cfg.holdout_fraction, cfg.seed);
    log::info("seq2seq: holding out " + std::to_string(validation.size()) + " pairs for validation");
  }

  std::vector<std::string> sources, targets;
  for (const auto& p : training) {
    sources.push_back(p.source);
    targets.push_back(p.target);
  }
  Network net(cfg, CharVocab::from_strings(sources), CharVocab::from_strings(targets));
  net.initialize(cfg.seed);

  std::vector<Example> examples;
  examples.reserve(training.size());
  for (const auto& p : training) examples.push_back(net.encode_pair(p.source, p.target, p.weight));

  std::mt19937_64 shuffle_rng(cfg.seed + 1);
  std::mt19937_64 dropout_rng(cfg.seed + 2);
  std::mt19937_64* drop = cfg.dropout > 0.0 ? &dropout_rng : nullptr;
  Adam adam(net.parameters(), cfg.learning_rate);
  Parameters grads = net.parameters().zeros_like();

  TrainResult result;
  result.validation = validation;
  Parameters best_params = net.parameters();
  auto metric = [&](int epoch) {
    return hooks.validation_metric ? hooks.validation_metric(net, epoch) : score_validation(net, validation);
  };

  std::vector<std::size_t> order(examples.size());
  int since_best = 0;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0, epoch_weight = 0;
    bool improved = false;
    for (std::size_t start = 0, batch = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size), ++batch) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      double total = 0;
      for (std::size_t k = start; k < end; ++k) total += examples[order[k]].weight;
      grads.set_zero();
      for (std::size_t k = start; k < end; ++k) {
        const auto& ex = examples[order[k]];
        const double loss = net.forward_backward(ex, ex.weight / total, &grads, drop);
        if (!std::isfinite(loss))
          throw NumericalError("non-finite loss in epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) +
                               " (example '" + training[order[k]].source + "')");
        epoch_loss += ex.weight * loss;
      }
      epoch_weight += total;
      if (cfg.clip_norm > 0.0) detail::clip(grads, cfg.clip_norm);
      adam.step(net.parameters(), grads);
      ++result.updates;
      if (hooks.on_update) hooks.on_update(result.updates, net.parameters());
      if (cfg.checkpoint_every_updates > 0 && result.updates % cfg.checkpoint_every_updates == 0) {
        const ValidationScore m = metric(epoch);
        if (m.better_than(result.best_validation)) {
          result.best_validation = m;
          result.best_epoch = epoch;
          best_params = net.parameters();
          improved = true;
        }
      }
    }
    if (!net.parameters().all_finite()) throw NumericalError("non-finite parameters after epoch " + std::to_string(epoch));

    const ValidationScore m = metric(epoch);
    if (m.better_than(result.best_validation)) {
      result.best_validation = m;
      result.best_epoch = epoch;
      best_params = net.parameters();
      improved = true;
    }
    EpochLog entry{epoch, epoch_loss / epoch_weight, m.exact_match, m.loss, improved};
    result.log.push_back(entry);
    log::info("seq2seq " + format_epoch_log(entry));
    if (hooks.on_epoch) hooks.on_epoch(entry);
    since_best = improved ? 0 : since_best + 1;
    if (since_best >= cfg.patience_epochs) break;
  }
  net.parameters() = std::move(best_params);
  result.model = std::move(net);
  return result;
}

inline std::string translate_seq2seq(const Network& model, std::string_view oov) { return model.translate(oov); }

// ---------------------------------------------------------------------------
// Gradient check

struct GradientCheckResult {
  double max_relative_error = 0;
  std::size_t coordinates = 0;
  std::size_t tensors_covered = 0;
  std::string worst_tensor;
};

/// Weighted batch loss sum_i w_i L_i / sum_i w_i without dropout.
inline double batch_loss(const Network& net, const std::vector<Example>& batch, Parameters* grads = nullptr) {
  double total = 0;
  for (const auto& ex : batch) total += ex.weight;
  double loss = 0;
  for (const auto& ex : batch) loss += ex.weight / total * net.forward_backward(ex, ex.weight / total, grads, nullptr);
  return loss;
}

/// Compares analytic gradients with central differences on a random sample of
/// coordinates drawn evenly from every parameter tensor. The error per
/// coordinate is |g_a - g_fd| / max(|g_a|, |g_fd|, 1e-8).
inline GradientCheckResult gradient_check(Network net, const std::vector<Example>& batch, double epsilon = 1e-5,
                                          std::size_t min_coordinates = 200, std::uint64_t seed = 7) {
  Parameters analytic = net.parameters().zeros_like();
  batch_loss(net, batch, &analytic);
  if (!analytic.all_finite()) throw NumericalError("gradient_check: non-finite analytic gradient");

  auto& params = net.parameters();
  const std::size_t n_tensors = params.tensors.size();
  const std::size_t per_tensor = (min_coordinates + n_tensors - 1) / n_tensors;
  std::mt19937_64 rng(seed);
  GradientCheckResult r;
  for (std::size_t k = 0; k < n_tensors; ++k) {
    auto& t = params.tensors[k];
    std::uniform_int_distribution<Eigen::Index> pick(0, t.size() - 1);
    for (std::size_t j = 0; j < per_tensor; ++j) {
      const Eigen::Index idx = pick(rng);
      const double orig = t.data()[idx];
      t.data()[idx] = orig + epsilon;
      const double up = batch_loss(net, batch);
      t.data()[idx] = orig - epsilon;
      const double down = batch_loss(net, batch);
      t.data()[idx] = orig;
      if (!std::isfinite(up) || !std::isfinite(down)) throw NumericalError("gradient_check: non-finite loss");
      const double fd = (up - down) / (2 * epsilon);
      const double ga = analytic.tensors[k].data()[idx];
      const double err = std::abs(ga - fd) / std::max({std::abs(ga), std::abs(fd), 1e-8});
      if (err > r.max_relative_error) {
        r.max_relative_error = err;
        r.worst_tensor = params.names[k];
      }
      ++r.coordinates;
    }
    ++r.tensors_covered;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Checkpoints

inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void save_checkpoint(const Network& net, const std::filesystem::path& path) {
  text::AtomicFile f(path);
  binary::Writer w(f.stream());
  w.magic("OOVT-SEQ2SEQ", kCheckpointVersion);
  const auto& c = net.config();
  w.u32(static_cast<std::uint32_t>(c.enc_layers));
  w.u32(c.bidirectional_encoder ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(c.hidden_size));
  w.u32(static_cast<std::uint32_t>(c.char_emb_size));
  w.f64(c.dropout);
  w.f64(c.learning_rate);
  w.u32(static_cast<std::uint32_t>(c.batch_size));
  w.u32(static_cast<std::uint32_t>(c.patience_epochs));
  w.u32(static_cast<std::uint32_t>(c.max_epochs));
  w.u32(static_cast<std::uint32_t>(c.beam_size));
  w.u32(static_cast<std::uint32_t>(c.max_decode_len));
  w.i64(c.checkpoint_every_updates);
  w.f64(c.clip_norm);
  w.f64(c.init_range);
  w.f64(c.forget_bias);
  w.f64(c.holdout_fraction);
  w.u64(c.seed);
  auto chars = [&](const CharVocab& v) {
    std::vector<std::uint32_t> cs(v.chars().begin(), v.chars().end());
    w.array(cs);
  };
  chars(net.source_vocab());
  chars(net.target_vocab());
  const auto& p = net.parameters();
  w.u64(p.tensors.size());
  for (std::size_t k = 0; k < p.tensors.size(); ++k) {
    w.str(p.names[k]);
    w.u64(static_cast<std::uint64_t>(p.tensors[k].rows()));
    w.u64(static_cast<std::uint64_t>(p.tensors[k].cols()));
    w.raw(p.tensors[k].data(), static_cast<std::size_t>(p.tensors[k].size()) * sizeof(double));
  }
  f.commit();
}

inline Network load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path.string());
  binary::Reader r(in, path.string());
  if (auto v = r.magic("OOVT-SEQ2SEQ"); v != kCheckpointVersion)
    throw DataError(path.string() + ": unsupported checkpoint version " + std::to_string(v));
  Seq2SeqConfig c;
  c.enc_layers = static_cast<int>(r.u32());
  c.bidirectional_encoder = r.u32() != 0;
  c.hidden_size = static_cast<int>(r.u32());
  c.char_emb_size = static_cast<int>(r.u32());
  c.dropout = r.f64();
  c.learning_rate = r.f64();
  c.batch_size = static_cast<int>(r.u32());
  c.patience_epochs = static_cast<int>(r.u32());
  c.max_epochs = static_cast<int>(r.u32());
  c.beam_size = static_cast<int>(r.u32());
  c.max_decode_len = static_cast<int>(r.u32());
  c.checkpoint_every_updates = r.i64();
  c.clip_norm = r.f64();
  c.init_range = r.f64();
  c.forget_bias = r.f64();
  c.holdout_fraction = r.f64();
  c.seed = r.u64();
  auto chars = [&] {
    auto cs = r.array<std::uint32_t>();
    return CharVocab(std::vector<char32_t>(cs.begin(), cs.end()));
  };
  CharVocab src = chars();
  CharVocab tgt = chars();
  Network net(c, std::move(src), std::move(tgt));
  auto& p = net.parameters();
  if (r.u64() != p.tensors.size()) throw DataError(path.string() + ": tensor count does not match config");
  for (std::size_t k = 0; k < p.tensors.size(); ++k) {
    const auto name = r.str();
    const auto rows = r.u64();
    const auto cols = r.u64();
    if (name != p.names[k] || rows != static_cast<std::uint64_t>(p.tensors[k].rows()) ||
        cols != static_cast<std::uint64_t>(p.tensors[k].cols()))
      throw DataError(path.string() + ": unexpected tensor '" + name + "'");
    r.raw(p.tensors[k].data(), static_cast<std::size_t>(p.tensors[k].size()) * sizeof(double));
  }
  return net;
}

}  // namespace oovt::seq2seq
