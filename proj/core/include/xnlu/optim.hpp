#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "xnlu/autodiff.hpp"

namespace xnlu {

enum class OptimizerKind { sgd, adam };

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 0.01;
  std::size_t step = 0;
  double best_validation_perplexity = std::numeric_limits<double>::infinity();
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Global gradient-norm clip applied by apply_update(); <= 0 disables.
  double clip_norm = 5.0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;

  static OptimizerState adam(double learning_rate);
  static OptimizerState sgd(double learning_rate);
};

/// Adam with bias correction. `grads` must hold a slot for every parameter.
void adam_step(OptimizerState& state, std::span<Parameter* const> params, const Gradients& grads);

/// Plain SGD: theta -= lr * g.
void sgd_step(OptimizerState& state, std::span<Parameter* const> params, const Gradients& grads);

/// Rescales `grads` so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
double clip_global_norm(Gradients& grads, double max_norm);

/// Clips (per state.clip_norm) and dispatches on state.kind.
void apply_update(OptimizerState& state, std::span<Parameter* const> params, Gradients& grads);

/// End-of-epoch schedule: multiplies the learning rate by 0.99 whenever the
/// epoch's validation perplexity is worse than the best seen so far, then
/// records the new best. Returns true when a decay happened.
bool sgd_ppl_decay(OptimizerState& state, double epoch_validation_perplexity);

}  // namespace xnlu
