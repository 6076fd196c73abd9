#include "xnlu/optim.hpp"

#include <cmath>

#include "eigen_maps.hpp"
#include "xnlu/error.hpp"

namespace xnlu {

using detail::as_vector;

OptimizerState OptimizerState::adam(double learning_rate) {
  OptimizerState s;
  s.kind = OptimizerKind::adam;
  s.learning_rate = learning_rate;
  return s;
}

OptimizerState OptimizerState::sgd(double learning_rate) {
  OptimizerState s;
  s.kind = OptimizerKind::sgd;
  s.learning_rate = learning_rate;
  return s;
}

namespace {

void check_shapes(std::span<Parameter* const> params, const Gradients& grads) {
  for (const Parameter* p : params) {
    const Tensor* g = grads.find(*p);
    require(g != nullptr, "no gradient for parameter '" + p->name + "'");
    require(g->shape() == p->value.shape(), "gradient shape " + shape_string(g->shape()) + " does not match parameter '" +
                                                p->name + "' " + shape_string(p->value.shape()));
  }
}

}  // namespace

void adam_step(OptimizerState& state, std::span<Parameter* const> params, const Gradients& grads) {
  require(state.kind == OptimizerKind::adam, "adam_step on a non-Adam optimizer state");
  require(state.learning_rate > 0.0, "learning rate must be positive");
  check_shapes(params, grads);
  if (state.first_moment.empty()) {
    for (const Parameter* p : params) {
      state.first_moment.emplace_back(p->value.shape());
      state.second_moment.emplace_back(p->value.shape());
    }
  }
  require(state.first_moment.size() == params.size(), "optimizer state was built for a different parameter list");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    require(state.first_moment[i].shape() == p.value.shape(),
            "moment shape does not match parameter '" + p.name + "'");
    const auto g = as_vector(grads.slot(p)).array();
    auto m = as_vector(state.first_moment[i]).array();
    auto v = as_vector(state.second_moment[i]).array();
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
    as_vector(p.value).array() -=
        state.learning_rate * (m / correction1) / ((v / correction2).sqrt() + state.epsilon);
  }
}

void sgd_step(OptimizerState& state, std::span<Parameter* const> params, const Gradients& grads) {
  require(state.kind == OptimizerKind::sgd, "sgd_step on a non-SGD optimizer state");
  require(state.learning_rate > 0.0, "learning rate must be positive");
  check_shapes(params, grads);
  ++state.step;
  for (Parameter* p : params) as_vector(p->value) -= state.learning_rate * as_vector(grads.slot(*p));
}

double clip_global_norm(Gradients& grads, double max_norm) {
  const double norm = grads.norm();
  if (!std::isfinite(norm)) throw NumericError("non-finite gradient norm");
  if (max_norm > 0.0 && norm > max_norm) grads.scale(max_norm / norm);
  return norm;
}

void apply_update(OptimizerState& state, std::span<Parameter* const> params, Gradients& grads) {
  clip_global_norm(grads, state.clip_norm);
  if (state.kind == OptimizerKind::adam)
    adam_step(state, params, grads);
  else
    sgd_step(state, params, grads);
}

bool sgd_ppl_decay(OptimizerState& state, double epoch_validation_perplexity) {
  require(std::isfinite(epoch_validation_perplexity) && epoch_validation_perplexity > 0.0,
          "validation perplexity must be finite and positive");
  const bool worse = epoch_validation_perplexity > state.best_validation_perplexity;
  if (worse) state.learning_rate *= 0.99;
  if (epoch_validation_perplexity < state.best_validation_perplexity)
    state.best_validation_perplexity = epoch_validation_perplexity;
  return worse;
}

}  // namespace xnlu
