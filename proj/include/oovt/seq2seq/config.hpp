#pragma once

#include <cstdint>

#include "oovt/errors.hpp"

namespace oovt::seq2seq {

struct Seq2SeqConfig {
  int enc_layers = 1;
  bool bidirectional_encoder = true;
  int hidden_size = 64;
  int char_emb_size = 32;
  double dropout = 0.3;  // after every recurrent layer except the last
  double learning_rate = 0.001;
  int batch_size = 4;
  int patience_epochs = 3;
  int max_epochs = 50;
  int beam_size = 1;
  int max_decode_len = 64;
  std::int64_t checkpoint_every_updates = 0;  // 0: checkpoint at epoch ends only
  double clip_norm = 5.0;                     // 0: no clipping
  double init_range = 0.3;
  double forget_bias = 1.0;  // initial forget-gate bias of every LSTM
  double holdout_fraction = 0.05;  // used when no validation set is supplied
  std::uint64_t seed = 1;

  /// Three-layer bidirectional 1024-unit configuration with the original optimizer settings.
  static Seq2SeqConfig paper_preset() {
    Seq2SeqConfig c;
    c.enc_layers = 3;
    c.bidirectional_encoder = true;
    c.hidden_size = 1024;
    c.char_emb_size = 1024;
    c.dropout = 0.3;
    c.learning_rate = 1e-4;
    c.batch_size = 128;
    c.checkpoint_every_updates = 10000;
    c.clip_norm = 0.0;
    c.init_range = 0.1;
    c.max_epochs = 1000;
    return c;
  }

  void validate() const {
    if (enc_layers <= 0 || hidden_size <= 0 || char_emb_size <= 0 || batch_size <= 0 || patience_epochs <= 0 ||
        max_epochs <= 0 || max_decode_len <= 0)
      throw UsageError("seq2seq config: sizes must be positive");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw UsageError("seq2seq config: dropout must be in [0, 1)");
    if (beam_size != 1) throw UsageError("seq2seq config: only beam_size = 1 (greedy) is supported");
    if (!(learning_rate > 0.0)) throw UsageError("seq2seq config: learning rate must be positive");
    if (checkpoint_every_updates < 0 || clip_norm < 0.0 || init_range <= 0.0)
      throw UsageError("seq2seq config: invalid checkpoint/clip/init settings");
    if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
      throw UsageError("seq2seq config: holdout_fraction must be in (0, 1)");
  }
};

}  // namespace oovt::seq2seq
