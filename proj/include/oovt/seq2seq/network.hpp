#pragma once

// Character-level attentional encoder-decoder.
//
//   encoder  stacked LSTM, optionally bidirectional; the two direction states
//            of each layer are concatenated and linearly projected back to
//            hidden_size. Decoder layer l starts from the sum of the final
//            forward and backward states of encoder layer l.
//   decoder  stacked LSTM whose first-layer input is [char embedding; previous
//            attentional output] (input feeding).
//   attention  score(h_t, hbar_s) = h_t' W_a hbar_s, softmax over source
//            positions, context = weighted sum, htilde = tanh(W_c [ctx; h_t]).
//   output   softmax(W_out htilde + b_out).
//
// Everything is double precision; gradients are hand-derived and verified by
// finite differences in the test suite.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "oovt/errors.hpp"
#include "oovt/seq2seq/char_vocab.hpp"
#include "oovt/seq2seq/config.hpp"

namespace oovt::seq2seq {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Named dense tensors. Gradients and optimizer moments share the same layout.
struct Parameters {
  std::vector<std::string> names;
  std::vector<Mat> tensors;

  std::size_t add(std::string name, Eigen::Index rows, Eigen::Index cols) {
    names.push_back(std::move(name));
    tensors.push_back(Mat::Zero(rows, cols));
    return tensors.size() - 1;
  }

  Parameters zeros_like() const {
    Parameters p;
    p.names = names;
    for (const auto& t : tensors) p.tensors.push_back(Mat::Zero(t.rows(), t.cols()));
    return p;
  }

  void set_zero() {
    for (auto& t : tensors) t.setZero();
  }

  std::size_t coefficient_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors) n += static_cast<std::size_t>(t.size());
    return n;
  }

  bool all_finite() const {
    for (const auto& t : tensors)
      if (!t.allFinite()) return false;
    return true;
  }

  double squared_norm() const {
    double s = 0;
    for (const auto& t : tensors) s += t.squaredNorm();
    return s;
  }

  std::size_t index_of(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    throw UsageError("no parameter tensor named '" + std::string(name) + "'");
  }
};

struct LstmWeights {
  std::size_t W = 0, U = 0, b = 0;
};

struct Layout {
  std::size_t src_emb = 0, tgt_emb = 0;
  std::vector<std::array<LstmWeights, 2>> encoder;  // [layer][forward, backward]
  std::vector<std::size_t> proj_W, proj_b;          // bidirectional only
  std::vector<LstmWeights> decoder;
  std::size_t attn_W = 0, comb_W = 0, out_W = 0, out_b = 0;
};

inline Layout build_layout(Parameters& p, const Seq2SeqConfig& cfg, int src_vocab, int tgt_vocab) {
  const Eigen::Index H = cfg.hidden_size, E = cfg.char_emb_size;
  Layout L;
  L.src_emb = p.add("encoder.embedding", E, src_vocab);
  const int dirs = cfg.bidirectional_encoder ? 2 : 1;
  for (int l = 0; l < cfg.enc_layers; ++l) {
    const Eigen::Index in = l == 0 ? E : H;
    std::array<LstmWeights, 2> layer{};
    for (int d = 0; d < dirs; ++d) {
      const std::string pre = "encoder.l" + std::to_string(l) + (d == 0 ? ".fwd" : ".bwd");
      layer[static_cast<std::size_t>(d)] = {p.add(pre + ".W", 4 * H, in), p.add(pre + ".U", 4 * H, H),
                                            p.add(pre + ".b", 4 * H, 1)};
    }
    L.encoder.push_back(layer);
    if (cfg.bidirectional_encoder) {
      L.proj_W.push_back(p.add("encoder.l" + std::to_string(l) + ".proj.W", H, 2 * H));
      L.proj_b.push_back(p.add("encoder.l" + std::to_string(l) + ".proj.b", H, 1));
    }
  }
  L.tgt_emb = p.add("decoder.embedding", E, tgt_vocab);
  for (int l = 0; l < cfg.enc_layers; ++l) {
    const Eigen::Index in = l == 0 ? E + H : H;
    const std::string pre = "decoder.l" + std::to_string(l);
    L.decoder.push_back({p.add(pre + ".W", 4 * H, in), p.add(pre + ".U", 4 * H, H), p.add(pre + ".b", 4 * H, 1)});
  }
  L.attn_W = p.add("attention.W_a", H, H);
  L.comb_W = p.add("attention.W_c", H, 2 * H);
  L.out_W = p.add("output.W", tgt_vocab, H);
  L.out_b = p.add("output.b", tgt_vocab, 1);
  return L;
}

// ---------------------------------------------------------------------------
// LSTM cell

struct LstmStep {
  Vec x, h_prev, c_prev;
  Vec i, f, g, o;  // activated gates
  Vec c, tanh_c, h;
};

inline Vec sigmoid(const Vec& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

inline LstmStep lstm_forward(const Mat& W, const Mat& U, const Mat& b, const Vec& x, const Vec& h_prev,
                             const Vec& c_prev) {
  const Eigen::Index H = U.cols();
  Vec z = W * x + U * h_prev + b.col(0);
  LstmStep s;
  s.x = x;
  s.h_prev = h_prev;
  s.c_prev = c_prev;
  s.i = sigmoid(z.segment(0, H));
  s.f = sigmoid(z.segment(H, H));
  s.g = z.segment(2 * H, H).array().tanh().matrix();
  s.o = sigmoid(z.segment(3 * H, H));
  s.c = s.f.cwiseProduct(c_prev) + s.i.cwiseProduct(s.g);
  s.tanh_c = s.c.array().tanh().matrix();
  s.h = s.o.cwiseProduct(s.tanh_c);
  return s;
}

struct LstmBack {
  Vec dx, dh_prev, dc_prev;
};

inline LstmBack lstm_backward(const LstmStep& s, const Mat& W, const Mat& U, const Vec& dh, const Vec& dc_next,
                              Mat& gW, Mat& gU, Mat& gb) {
  const Eigen::Index H = U.cols();
  const auto one = Vec::Ones(H).array();
  Vec d_o = dh.cwiseProduct(s.tanh_c);
  Vec dc = dc_next + dh.cwiseProduct(s.o).cwiseProduct((one - s.tanh_c.array().square()).matrix());
  Vec dz(4 * H);
  dz.segment(0, H) = (dc.array() * s.g.array() * s.i.array() * (one - s.i.array())).matrix();
  dz.segment(H, H) = (dc.array() * s.c_prev.array() * s.f.array() * (one - s.f.array())).matrix();
  dz.segment(2 * H, H) = (dc.array() * s.i.array() * (one - s.g.array().square())).matrix();
  dz.segment(3 * H, H) = (d_o.array() * s.o.array() * (one - s.o.array())).matrix();
  gW.noalias() += dz * s.x.transpose();
  gU.noalias() += dz * s.h_prev.transpose();
  gb.col(0) += dz;
  return {W.transpose() * dz, U.transpose() * dz, dc.cwiseProduct(s.f)};
}

// ---------------------------------------------------------------------------

/// softmax(z); also returns log-sum-exp for a stable log-probability.
inline Vec softmax(const Vec& z, double* log_norm = nullptr) {
  const double m = z.maxCoeff();
  Vec e = (z.array() - m).exp().matrix();
  const double s = e.sum();
  if (log_norm) *log_norm = m + std::log(s);
  return e / s;
}

struct AttentionResult {
  Vec u;        // W_a h_t
  Vec weights;  // softmax over source positions
  Vec context;
};

/// Global attention with the general (bilinear) score.
inline AttentionResult attention_step(const Vec& h_t, const Mat& encoder_states, const Mat& W_a) {
  if (h_t.size() != W_a.rows() || encoder_states.rows() != W_a.cols() || encoder_states.cols() == 0)
    throw UsageError("attention_step: shape mismatch");
  AttentionResult r;
  r.u = W_a.transpose() * h_t;  // score_s = h_t' W_a hbar_s = hbar_s' (W_a' h_t)
  r.weights = softmax(encoder_states.transpose() * r.u);
  r.context = encoder_states * r.weights;
  return r;
}

struct Example {
  std::vector<int> source;
  std::vector<int> target;  // without EOS
  double weight = 1.0;
};

/// Per-step distributions recorded during greedy decoding.
struct DecodeTrace {
  std::vector<Vec> attention;
  std::vector<Vec> output;
};

class Network {
 public:
  Network() = default;

  Network(Seq2SeqConfig cfg, CharVocab src, CharVocab tgt)
      : cfg_(cfg), src_vocab_(std::move(src)), tgt_vocab_(std::move(tgt)) {
    cfg_.validate();
    layout_ = build_layout(params_, cfg_, src_vocab_.size(), tgt_vocab_.size());
  }

  void initialize(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-cfg_.init_range, cfg_.init_range);
    for (auto& t : params_.tensors)
      for (Eigen::Index k = 0; k < t.size(); ++k) t.data()[k] = u(rng);
    const Eigen::Index H = cfg_.hidden_size;
    auto set_forget = [&](const LstmWeights& w) { params_.tensors[w.b].block(H, 0, H, 1).setConstant(cfg_.forget_bias); };
    const int dirs = cfg_.bidirectional_encoder ? 2 : 1;
    for (const auto& layer : layout_.encoder)
      for (int d = 0; d < dirs; ++d) set_forget(layer[static_cast<std::size_t>(d)]);
    for (const auto& w : layout_.decoder) set_forget(w);
  }

  const Seq2SeqConfig& config() const { return cfg_; }
  Seq2SeqConfig& mutable_config() { return cfg_; }
  const CharVocab& source_vocab() const { return src_vocab_; }
  const CharVocab& target_vocab() const { return tgt_vocab_; }
  const Layout& layout() const { return layout_; }
  Parameters& parameters() { return params_; }
  const Parameters& parameters() const { return params_; }

  Example encode_pair(std::string_view source, std::string_view target, double weight) const {
    return {src_vocab_.encode(source), tgt_vocab_.encode(target), weight};
  }

  /// Summed per-character cross-entropy of one example. When grads is given,
  /// scale * d(loss)/d(theta) is accumulated into it. Dropout is active only
  /// when a generator is supplied.
  double forward_backward(const Example& ex, double scale, Parameters* grads, std::mt19937_64* dropout_rng) const {
    if (ex.source.empty()) throw UsageError("empty source sequence");
    const bool train = dropout_rng != nullptr && cfg_.dropout > 0.0;
    EncoderCache enc = encode(ex.source, train ? dropout_rng : nullptr);

    const std::size_t T = ex.target.size() + 1;
    std::vector<StepCache> steps;
    steps.reserve(T);
    std::vector<Vec> h = enc.init_h, c = enc.init_c;
    Vec feed = Vec::Zero(cfg_.hidden_size);
    double loss = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      const int prev = t == 0 ? CharVocab::BOS : ex.target[t - 1];
      const int gold = t < ex.target.size() ? ex.target[t] : CharVocab::EOS;
      StepCache s = decoder_step(enc.states, prev, feed, h, c, train ? dropout_rng : nullptr);
      loss += s.log_norm - s.logits(gold);
      for (std::size_t l = 0; l < h.size(); ++l) {
        h[l] = s.layers[l].h;
        c[l] = s.layers[l].c;
      }
      feed = s.htilde;
      s.gold = gold;
      steps.push_back(std::move(s));
    }
    if (grads) backward(ex, enc, steps, scale, *grads);
    return loss;
  }

  /// Greedy (beam 1) decoding. Stops at EOS or after max_decode_len steps.
  /// PAD and BOS are never emitted; ties go to the lowest id.
  std::vector<int> greedy(const std::vector<int>& source, DecodeTrace* trace = nullptr) const {
    if (source.empty()) return {};
    EncoderCache enc = encode(source, nullptr);
    std::vector<Vec> h = enc.init_h, c = enc.init_c;
    Vec feed = Vec::Zero(cfg_.hidden_size);
    int prev = CharVocab::BOS;
    std::vector<int> out;
    for (int t = 0; t < cfg_.max_decode_len; ++t) {
      StepCache s = decoder_step(enc.states, prev, feed, h, c, nullptr);
      if (trace) {
        trace->attention.push_back(s.attn.weights);
        trace->output.push_back(s.probs);
      }
      int best = CharVocab::EOS;
      for (int k = CharVocab::EOS; k < s.logits.size(); ++k)
        if (s.logits(k) > s.logits(best)) best = k;
      if (best == CharVocab::EOS) break;
      out.push_back(best);
      for (std::size_t l = 0; l < h.size(); ++l) {
        h[l] = s.layers[l].h;
        c[l] = s.layers[l].c;
      }
      feed = s.htilde;
      prev = best;
    }
    return out;
  }

  std::string translate(std::string_view oov, DecodeTrace* trace = nullptr) const {
    return tgt_vocab_.decode(greedy(src_vocab_.encode(oov), trace));
  }

 private:
  struct EncoderCache {
    std::vector<std::vector<Vec>> inputs;                     // [layer][pos]
    std::vector<std::array<std::vector<LstmStep>, 2>> steps;  // [layer][dir][pos]
    std::vector<std::vector<Vec>> masks;                      // [layer][pos], layers below the top
    Mat states;                                               // hidden x S
    std::vector<Vec> init_h, init_c;
  };

  struct StepCache {
    int prev = 0;
    int gold = 0;
    Vec feed;
    std::vector<LstmStep> layers;
    std::vector<Vec> masks;
    AttentionResult attn;
    Vec combined_in;  // [context; h_top]
    Vec htilde;
    Vec logits, probs;
    double log_norm = 0;
  };

  const Mat& P(std::size_t i) const { return params_.tensors[i]; }

  Vec dropout_mask(Eigen::Index n, std::mt19937_64* rng) const {
    Vec m(n);
    std::bernoulli_distribution keep(1.0 - cfg_.dropout);
    const double inv = 1.0 / (1.0 - cfg_.dropout);
    for (Eigen::Index k = 0; k < n; ++k) m(k) = keep(*rng) ? inv : 0.0;
    return m;
  }

  EncoderCache encode(const std::vector<int>& src, std::mt19937_64* rng) const {
    const auto S = src.size();
    const Eigen::Index H = cfg_.hidden_size;
    const auto L = static_cast<std::size_t>(cfg_.enc_layers);
    const bool bi = cfg_.bidirectional_encoder;
    EncoderCache e;
    e.inputs.assign(L, std::vector<Vec>(S));
    e.steps.resize(L);
    e.masks.assign(L, {});
    e.states = Mat::Zero(H, static_cast<Eigen::Index>(S));
    for (std::size_t s = 0; s < S; ++s) e.inputs[0][s] = P(layout_.src_emb).col(src[s]);

    for (std::size_t l = 0; l < L; ++l) {
      const auto& w = layout_.encoder[l];
      auto& fwd = e.steps[l][0];
      Vec h = Vec::Zero(H), c = Vec::Zero(H);
      for (std::size_t s = 0; s < S; ++s) {
        fwd.push_back(lstm_forward(P(w[0].W), P(w[0].U), P(w[0].b), e.inputs[l][s], h, c));
        h = fwd.back().h;
        c = fwd.back().c;
      }
      e.init_h.push_back(fwd.back().h);
      e.init_c.push_back(fwd.back().c);
      if (bi) {
        auto& bwd = e.steps[l][1];
        bwd.resize(S);
        h.setZero();
        c.setZero();
        for (std::size_t s = S; s-- > 0;) {
          bwd[s] = lstm_forward(P(w[1].W), P(w[1].U), P(w[1].b), e.inputs[l][s], h, c);
          h = bwd[s].h;
          c = bwd[s].c;
        }
        e.init_h.back() += bwd[0].h;
        e.init_c.back() += bwd[0].c;
      }
      for (std::size_t s = 0; s < S; ++s) {
        Vec out;
        if (bi) {
          Vec cat(2 * H);
          cat << fwd[s].h, e.steps[l][1][s].h;
          out = P(layout_.proj_W[l]) * cat + P(layout_.proj_b[l]).col(0);
        } else {
          out = fwd[s].h;
        }
        if (l + 1 < L) {
          if (rng) {
            e.masks[l].push_back(dropout_mask(H, rng));
            out = out.cwiseProduct(e.masks[l].back());
          }
          e.inputs[l + 1][s] = out;
        } else {
          e.states.col(static_cast<Eigen::Index>(s)) = out;
        }
      }
    }
    return e;
  }

  StepCache decoder_step(const Mat& states, int prev, const Vec& feed, const std::vector<Vec>& h,
                         const std::vector<Vec>& c, std::mt19937_64* rng) const {
    const Eigen::Index H = cfg_.hidden_size, E = cfg_.char_emb_size;
    StepCache s;
    s.prev = prev;
    s.feed = feed;
    Vec x(E + H);
    x << P(layout_.tgt_emb).col(prev), feed;
    for (std::size_t l = 0; l < layout_.decoder.size(); ++l) {
      const auto& w = layout_.decoder[l];
      s.layers.push_back(lstm_forward(P(w.W), P(w.U), P(w.b), x, h[l], c[l]));
      x = s.layers.back().h;
      if (l + 1 < layout_.decoder.size() && rng) {
        s.masks.push_back(dropout_mask(H, rng));
        x = x.cwiseProduct(s.masks.back());
      }
    }
    const Vec& top = s.layers.back().h;
    s.attn = attention_step(top, states, P(layout_.attn_W));
    s.combined_in.resize(2 * H);
    s.combined_in << s.attn.context, top;
    s.htilde = (P(layout_.comb_W) * s.combined_in).array().tanh().matrix();
    s.logits = P(layout_.out_W) * s.htilde + P(layout_.out_b).col(0);
    s.probs = softmax(s.logits, &s.log_norm);
    return s;
  }

  void backward(const Example& ex, const EncoderCache& enc, const std::vector<StepCache>& steps, double scale,
                Parameters& g) const {
    const Eigen::Index H = cfg_.hidden_size, E = cfg_.char_emb_size;
    const std::size_t L = layout_.decoder.size();
    auto& G = g.tensors;
    Mat d_states = Mat::Zero(enc.states.rows(), enc.states.cols());
    std::vector<Vec> carry_h(L, Vec::Zero(H)), carry_c(L, Vec::Zero(H));
    Vec d_feed = Vec::Zero(H);

    for (std::size_t t = steps.size(); t-- > 0;) {
      const StepCache& s = steps[t];
      Vec d_logits = scale * s.probs;
      d_logits(s.gold) -= scale;
      G[layout_.out_W].noalias() += d_logits * s.htilde.transpose();
      G[layout_.out_b].col(0) += d_logits;
      Vec d_htilde = P(layout_.out_W).transpose() * d_logits + d_feed;

      Vec d_pre = d_htilde.cwiseProduct((1.0 - s.htilde.array().square()).matrix());
      G[layout_.comb_W].noalias() += d_pre * s.combined_in.transpose();
      Vec d_cat = P(layout_.comb_W).transpose() * d_pre;
      Vec d_ctx = d_cat.head(H);
      Vec d_top = d_cat.tail(H);

      const Vec& a = s.attn.weights;
      d_states.noalias() += d_ctx * a.transpose();
      Vec d_a = enc.states.transpose() * d_ctx;
      Vec d_scores = a.cwiseProduct((d_a.array() - a.dot(d_a)).matrix());
      d_states.noalias() += s.attn.u * d_scores.transpose();
      Vec d_u = enc.states * d_scores;
      const Vec& top = s.layers.back().h;
      // u = W_a' h  =>  dW_a += h d_u',  dh += W_a d_u
      G[layout_.attn_W].noalias() += top * d_u.transpose();
      d_top += P(layout_.attn_W) * d_u;

      Vec dh = d_top;
      for (std::size_t l = L; l-- > 0;) {
        const auto& w = layout_.decoder[l];
        LstmBack b = lstm_backward(s.layers[l], P(w.W), P(w.U), dh + carry_h[l], carry_c[l], G[w.W], G[w.U], G[w.b]);
        carry_h[l] = b.dh_prev;
        carry_c[l] = b.dc_prev;
        if (l > 0) {
          dh = s.masks.empty() ? b.dx : Vec(b.dx.cwiseProduct(s.masks[l - 1]));
        } else {
          G[layout_.tgt_emb].col(s.prev) += b.dx.head(E);
          d_feed = b.dx.tail(H);
        }
      }
    }

    // Encoder, top layer first. carry_* now hold gradients of the decoder's initial state.
    const std::size_t S = ex.source.size();
    const bool bi = cfg_.bidirectional_encoder;
    std::vector<Vec> d_out(S);
    for (std::size_t s = 0; s < S; ++s) d_out[s] = d_states.col(static_cast<Eigen::Index>(s));
    for (std::size_t l = L; l-- > 0;) {
      const auto& w = layout_.encoder[l];
      const auto& fwd = enc.steps[l][0];
      std::vector<Vec> d_fwd(S), d_bwd;
      if (bi) {
        d_bwd.resize(S);
        for (std::size_t s = 0; s < S; ++s) {
          Vec cat(2 * H);
          cat << fwd[s].h, enc.steps[l][1][s].h;
          G[layout_.proj_W[l]].noalias() += d_out[s] * cat.transpose();
          G[layout_.proj_b[l]].col(0) += d_out[s];
          Vec dc = P(layout_.proj_W[l]).transpose() * d_out[s];
          d_fwd[s] = dc.head(H);
          d_bwd[s] = dc.tail(H);
        }
      } else {
        d_fwd = d_out;
      }
      std::vector<Vec> d_in(S, Vec::Zero(l == 0 ? E : H));
      Vec ch = carry_h[l], cc = carry_c[l];
      for (std::size_t s = S; s-- > 0;) {
        LstmBack b = lstm_backward(fwd[s], P(w[0].W), P(w[0].U), d_fwd[s] + ch, cc, G[w[0].W], G[w[0].U], G[w[0].b]);
        ch = b.dh_prev;
        cc = b.dc_prev;
        d_in[s] += b.dx;
      }
      if (bi) {
        const auto& bwd = enc.steps[l][1];
        ch = carry_h[l];
        cc = carry_c[l];
        for (std::size_t s = 0; s < S; ++s) {
          LstmBack b = lstm_backward(bwd[s], P(w[1].W), P(w[1].U), d_bwd[s] + ch, cc, G[w[1].W], G[w[1].U], G[w[1].b]);
          ch = b.dh_prev;
          cc = b.dc_prev;
          d_in[s] += b.dx;
        }
      }
      if (l > 0) {
        for (std::size_t s = 0; s < S; ++s)
          d_out[s] = enc.masks[l - 1].empty() ? d_in[s] : Vec(d_in[s].cwiseProduct(enc.masks[l - 1][s]));
      } else {
        for (std::size_t s = 0; s < S; ++s) G[layout_.src_emb].col(ex.source[s]) += d_in[s];
      }
    }
  }

  Seq2SeqConfig cfg_;
  CharVocab src_vocab_, tgt_vocab_;
  Parameters params_;
  Layout layout_;
};

}  // namespace oovt::seq2seq
