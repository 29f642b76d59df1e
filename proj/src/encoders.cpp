#include "yun/encoders.hpp"

#include <algorithm>

#include "yun/errors.hpp"

namespace yun {

namespace {

Parameter uniform_param(std::string name, std::size_t rows, std::size_t cols, Rng& rng, double scale) {
  Tensor t(rows, cols);
  for (double& v : t.data()) v = rng.uniform(-scale, scale);
  return Parameter{std::move(name), std::move(t), true};
}

}  // namespace

LstmParams LstmParams::init(std::size_t input_dim, std::size_t hidden, Rng& rng, const std::string& name,
                            double scale) {
  LstmParams p{uniform_param(name + ".w_input", input_dim, 4 * hidden, rng, scale),
               uniform_param(name + ".w_hidden", hidden, 4 * hidden, rng, scale),
               Parameter{name + ".bias", Tensor(1, 4 * hidden), true}};
  for (std::size_t j = hidden; j < 2 * hidden; ++j) p.bias.value[j] = 1.0;
  return p;
}

AttentionParams AttentionParams::init(std::size_t state_dim, std::size_t attn_dim, Rng& rng, const std::string& name,
                                      double scale) {
  return AttentionParams{uniform_param(name + ".w", state_dim, attn_dim, rng, scale),
                         Parameter{name + ".b", Tensor(1, attn_dim), true},
                         uniform_param(name + ".context", 1, attn_dim, rng, scale)};
}

std::vector<Var> embed(Tape& tape, std::span<const std::size_t> ids, const EmbeddingTable& table) {
  Var t = tape.parameter(table.table);
  std::vector<Var> out;
  out.reserve(ids.size());
  for (std::size_t id : ids) out.push_back(gather_row(t, id));
  return out;
}

std::vector<Var> lstm_states(Tape& tape, std::span<const Var> inputs, const LstmParams& params) {
  const std::size_t d = params.hidden();
  Var wx = tape.parameter(params.w_input);
  Var wh = tape.parameter(params.w_hidden);
  Var b = tape.parameter(params.bias);

  std::vector<Var> states;
  states.reserve(inputs.size());
  Var h, c;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    if (inputs[t].cols() != params.input_dim())
      throw ShapeError("lstm: input width " + std::to_string(inputs[t].cols()) + " != " +
                       std::to_string(params.input_dim()));
    Var pre = add(matmul(inputs[t], wx), b);
    if (t > 0) pre = add(pre, matmul(h, wh));
    Var i = sigmoid(slice_cols(pre, 0, d));
    Var f = sigmoid(slice_cols(pre, d, d));
    Var g = tanh(slice_cols(pre, 2 * d, d));
    Var o = sigmoid(slice_cols(pre, 3 * d, d));
    // With zero initial state the forget term vanishes on the first step.
    c = t > 0 ? add(mul(f, c), mul(i, g)) : mul(i, g);
    h = mul(o, tanh(c));
    states.push_back(h);
  }
  return states;
}

Var lstm_encode(Tape& tape, std::span<const std::size_t> ids, const EmbeddingTable& table,
                const LstmParams& params) {
  if (ids.empty()) return tape.constant(Tensor(1, params.hidden()));
  auto inputs = embed(tape, ids, table);
  return lstm_states(tape, inputs, params).back();
}

Var bilstm_encode(Tape& tape, std::span<const std::size_t> ids, const EmbeddingTable& table,
                  const LstmParams& forward, const LstmParams& backward) {
  if (ids.empty()) throw ShapeError("bilstm_encode: empty sequence");
  auto inputs = embed(tape, ids, table);
  auto fwd = lstm_states(tape, inputs, forward);
  std::vector<Var> reversed(inputs.rbegin(), inputs.rend());
  auto bwd = lstm_states(tape, reversed, backward);

  const std::size_t n = ids.size();
  std::vector<Var> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Var pair[] = {fwd[i], bwd[n - 1 - i]};
    rows.push_back(concat(pair));
  }
  return concat_rows(rows);
}

AttentionResult attention_pool(Tape& tape, Var states, const AttentionParams& params) {
  if (states.cols() != params.state_dim())
    throw ShapeError("attention_pool: state width " + std::to_string(states.cols()) + " != " +
                     std::to_string(params.state_dim()));
  Var w = tape.parameter(params.w);
  Var b = tape.parameter(params.b);
  Var c = tape.parameter(params.context);
  Var m = tanh(add(matmul(states, w), b));
  Var a = softmax(matmul_transposed(c, m));
  return AttentionResult{weighted_sum(a, states), a, m};
}

}  // namespace yun
