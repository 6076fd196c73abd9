#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "xnlu/autodiff.hpp"
#include "xnlu/random.hpp"

namespace xnlu {

/// Weights drawn from uniform(-scale, scale).
Parameter uniform_parameter(std::string name, Shape shape, Rng& rng, double scale = 0.1);
Parameter zero_parameter(std::string name, Shape shape);

/// Gate order in every 4h block is [input, forget, candidate, output].
struct LstmParams {
  Parameter input_weights;      // [4h x in]
  Parameter recurrent_weights;  // [4h x h]
  Parameter bias;               // [4h]

  static LstmParams create(const std::string& name, std::size_t input_dim, std::size_t hidden_dim, Rng& rng);
  std::size_t input_dim() const { return input_weights.value.cols(); }
  std::size_t hidden_dim() const { return recurrent_weights.value.cols(); }
  void collect(ParameterList& out);
};

struct LstmState {
  Var h;
  Var c;
};

LstmState lstm_zero_state(Graph& g, std::size_t hidden_dim);

/// One LSTM transition from (h, c) on input x.
LstmState lstm_step(Graph& g, Var x, const LstmState& prev, const LstmParams& p);

/// Transition when W_x x + b has already been computed for the whole sequence.
LstmState lstm_step_projected(Graph& g, Var projected_input, const LstmState& prev, const LstmParams& p);

struct BiLstmLayer {
  LstmParams forward;
  LstmParams backward;
};

struct BiLstmStack {
  std::vector<BiLstmLayer> layers;
  double dropout = 0.0;

  static BiLstmStack create(const std::string& name, std::size_t input_dim, std::size_t hidden_dim,
                            std::size_t num_layers, double dropout, Rng& rng);
  std::size_t input_dim() const { return layers.front().forward.input_dim(); }
  std::size_t hidden_dim() const { return layers.back().forward.hidden_dim(); }
  std::size_t output_dim() const { return 2 * hidden_dim(); }
  void collect(ParameterList& out);
};

/// Runs the stack over `embedded` [T x D] and returns the top layer's
/// [forward ; backward] states as a [T x 2h] matrix. Dropout is applied to
/// every layer's input and to the final output, only when `train_mode` is
/// set (then `dropout_rng` must be non-null).
Var bilstm_encode(Graph& g, Var embedded, const BiLstmStack& stack, bool train_mode, Rng* dropout_rng);

/// Single-head structured self-attention: alpha = softmax(w2 . tanh(W1 h_t)).
struct SelfAttentionParams {
  Parameter projection;  // W1 [d_a x input]
  Parameter scorer;      // w2 [d_a]

  static SelfAttentionParams create(const std::string& name, std::size_t input_dim, std::size_t attention_dim,
                                    Rng& rng);
  void collect(ParameterList& out);
};

struct AttentionOutput {
  Var context;  // weighted sum of rows
  Var weights;  // attention distribution over rows
};

AttentionOutput self_attention(Graph& g, Var states, const SelfAttentionParams& p);

/// alpha = softmax(keys . query); context = keys^T alpha.
AttentionOutput dot_attention(Var query, Var keys);

}  // namespace xnlu
