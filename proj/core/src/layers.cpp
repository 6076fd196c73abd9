#include "xnlu/layers.hpp"

#include "xnlu/error.hpp"

namespace xnlu {

Parameter uniform_parameter(std::string name, Shape shape, Rng& rng, double scale) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(-scale, scale);
  return {std::move(name), std::move(t)};
}

Parameter zero_parameter(std::string name, Shape shape) { return {std::move(name), Tensor(std::move(shape))}; }

LstmParams LstmParams::create(const std::string& name, std::size_t input_dim, std::size_t hidden_dim, Rng& rng) {
  require(input_dim > 0 && hidden_dim > 0, "LSTM dimensions must be positive");
  return {uniform_parameter(name + ".w_input", {4 * hidden_dim, input_dim}, rng),
          uniform_parameter(name + ".w_recurrent", {4 * hidden_dim, hidden_dim}, rng),
          zero_parameter(name + ".bias", {4 * hidden_dim})};
}

void LstmParams::collect(ParameterList& out) {
  out.push_back(&input_weights);
  out.push_back(&recurrent_weights);
  out.push_back(&bias);
}

LstmState lstm_zero_state(Graph& g, std::size_t hidden_dim) {
  return {g.constant(Tensor({hidden_dim})), g.constant(Tensor({hidden_dim}))};
}

namespace {

LstmState split_cell_output(Var packed, std::size_t h) { return {slice(packed, 0, h), slice(packed, h, h)}; }

}  // namespace

LstmState lstm_step(Graph& g, Var x, const LstmState& prev, const LstmParams& p) {
  require(x.value().size() == p.input_dim(), "lstm_step: input width " + std::to_string(x.value().size()) +
                                                 " != " + std::to_string(p.input_dim()));
  require(prev.h.value().size() == p.hidden_dim() && prev.c.value().size() == p.hidden_dim(),
          "lstm_step: state width mismatch");
  Var projected = affine(g.param(p.input_weights), x, g.param(p.bias));
  return lstm_step_projected(g, projected, prev, p);
}

LstmState lstm_step_projected(Graph& g, Var projected_input, const LstmState& prev, const LstmParams& p) {
  Var gates = add(projected_input, matvec(g.param(p.recurrent_weights), prev.h));
  return split_cell_output(lstm_cell(gates, prev.c), p.hidden_dim());
}

BiLstmStack BiLstmStack::create(const std::string& name, std::size_t input_dim, std::size_t hidden_dim,
                                std::size_t num_layers, double dropout, Rng& rng) {
  require(num_layers >= 1, "biLSTM needs at least one layer");
  BiLstmStack s;
  s.dropout = dropout;
  for (std::size_t l = 0; l < num_layers; ++l) {
    const std::size_t in = l == 0 ? input_dim : 2 * hidden_dim;
    const std::string prefix = name + ".layer" + std::to_string(l);
    BiLstmLayer layer{LstmParams::create(prefix + ".fwd", in, hidden_dim, rng),
                      LstmParams::create(prefix + ".bwd", in, hidden_dim, rng)};
    s.layers.push_back(std::move(layer));
  }
  return s;
}

void BiLstmStack::collect(ParameterList& out) {
  for (BiLstmLayer& l : layers) {
    l.forward.collect(out);
    l.backward.collect(out);
  }
}

namespace {

std::vector<Var> run_direction(Graph& g, Var projected, const LstmParams& p, bool reverse) {
  const std::size_t steps = projected.value().rows();
  std::vector<Var> hs(steps);
  LstmState state = lstm_zero_state(g, p.hidden_dim());
  for (std::size_t k = 0; k < steps; ++k) {
    const std::size_t t = reverse ? steps - 1 - k : k;
    state = lstm_step_projected(g, row(projected, t), state, p);
    hs[t] = state.h;
  }
  return hs;
}

}  // namespace

Var bilstm_encode(Graph& g, Var embedded, const BiLstmStack& stack, bool train_mode, Rng* dropout_rng) {
  require(embedded.value().rank() == 2 && embedded.value().rows() >= 1, "bilstm_encode: empty sequence");
  require(embedded.value().cols() == stack.input_dim(), "bilstm_encode: input width " +
                                                            std::to_string(embedded.value().cols()) + " != " +
                                                            std::to_string(stack.input_dim()));
  const bool use_dropout = train_mode && stack.dropout > 0.0;
  require(!use_dropout || dropout_rng != nullptr, "bilstm_encode: dropout needs a random stream");
  Var x = embedded;
  for (const BiLstmLayer& layer : stack.layers) {
    if (use_dropout) x = dropout(x, stack.dropout, *dropout_rng);
    Var fwd_in = linear_rows(x, g.param(layer.forward.input_weights), g.param(layer.forward.bias));
    Var bwd_in = linear_rows(x, g.param(layer.backward.input_weights), g.param(layer.backward.bias));
    auto fwd = run_direction(g, fwd_in, layer.forward, false);
    auto bwd = run_direction(g, bwd_in, layer.backward, true);
    std::vector<Var> rows(fwd.size());
    for (std::size_t t = 0; t < fwd.size(); ++t) {
      const Var parts[] = {fwd[t], bwd[t]};
      rows[t] = concat(parts);
    }
    x = stack_rows(rows);
  }
  if (use_dropout) x = dropout(x, stack.dropout, *dropout_rng);
  return x;
}

SelfAttentionParams SelfAttentionParams::create(const std::string& name, std::size_t input_dim,
                                                std::size_t attention_dim, Rng& rng) {
  require(attention_dim > 0, "self-attention size must be positive");
  return {uniform_parameter(name + ".w1", {attention_dim, input_dim}, rng),
          uniform_parameter(name + ".w2", {attention_dim}, rng)};
}

void SelfAttentionParams::collect(ParameterList& out) {
  out.push_back(&projection);
  out.push_back(&scorer);
}

AttentionOutput self_attention(Graph& g, Var states, const SelfAttentionParams& p) {
  require(states.value().rank() == 2 && states.value().rows() >= 1, "self_attention: empty sequence");
  Var hidden = tanh(linear_rows(states, g.param(p.projection)));
  Var weights = softmax(matvec(hidden, g.param(p.scorer)));
  return {vecmat(weights, states), weights};
}

AttentionOutput dot_attention(Var query, Var keys) {
  require(keys.value().rank() == 2 && query.value().rank() == 1, "dot_attention: expects a query vector and key rows");
  require(keys.value().cols() == query.value().size(), "dot_attention: query width " +
                                                           std::to_string(query.value().size()) + " != key width " +
                                                           std::to_string(keys.value().cols()));
  Var weights = softmax(matvec(keys, query));
  return {vecmat(weights, keys), weights};
}

}  // namespace xnlu
