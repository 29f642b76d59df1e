#pragma once

// Sequence encoders: LSTM, Bi-LSTM and context-aware attention pooling.

#include <span>
#include <string>
#include <vector>

#include "yun/autodiff.hpp"
#include "yun/rng.hpp"
#include "yun/text.hpp"

namespace yun {

/// Gate blocks are laid out along columns in the order input, forget,
/// cell, output; each block is `hidden` wide.
struct LstmParams {
  Parameter w_input;   // input_dim x 4*hidden
  Parameter w_hidden;  // hidden x 4*hidden
  Parameter bias;      // 1 x 4*hidden

  std::size_t input_dim() const { return w_input.value.rows(); }
  std::size_t hidden() const { return w_hidden.value.rows(); }
  std::vector<Parameter*> parameters() { return {&w_input, &w_hidden, &bias}; }

  /// Uniform(-scale, scale) weights, zero bias except forget gate = 1.
  static LstmParams init(std::size_t input_dim, std::size_t hidden, Rng& rng, const std::string& name,
                         double scale = 0.08);
};

struct AttentionParams {
  Parameter w;        // state_dim x attn_dim
  Parameter b;        // 1 x attn_dim
  Parameter context;  // 1 x attn_dim

  std::size_t state_dim() const { return w.value.rows(); }
  std::size_t attn_dim() const { return w.value.cols(); }
  std::vector<Parameter*> parameters() { return {&w, &b, &context}; }

  static AttentionParams init(std::size_t state_dim, std::size_t attn_dim, Rng& rng, const std::string& name,
                              double scale = 0.08);
};

/// Embedded rows for each id; throws std::out_of_range on a bad id.
std::vector<Var> embed(Tape& tape, std::span<const std::size_t> ids, const EmbeddingTable& table);

/// Hidden state after every step, starting from zero state.
std::vector<Var> lstm_states(Tape& tape, std::span<const Var> inputs, const LstmParams& params);

/// Final hidden state (1 x hidden); zeros for an empty sequence.
Var lstm_encode(Tape& tape, std::span<const std::size_t> ids, const EmbeddingTable& table,
                const LstmParams& params);

/// n x 2*hidden matrix whose row i is forward_i || backward_i.
/// The sequence must be non-empty.
Var bilstm_encode(Tape& tape, std::span<const std::size_t> ids, const EmbeddingTable& table,
                  const LstmParams& forward, const LstmParams& backward);

struct AttentionResult {
  Var pooled;   // 1 x state_dim
  Var weights;  // 1 x n
  Var scores;   // n x attn_dim, tanh(H W + b)
};

/// m_i = tanh(W h_i + b), a = softmax_i(m_i . c), pooled = sum_i a_i h_i.
AttentionResult attention_pool(Tape& tape, Var states, const AttentionParams& params);

}  // namespace yun
