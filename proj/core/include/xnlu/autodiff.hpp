#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "xnlu/tensor.hpp"

namespace xnlu {

class Rng;

/// A named trainable tensor. Its gradient lives in a separate Gradients
/// buffer, and graphs only read the value.
struct Parameter {
  std::string name;
  Tensor value;
};

using ParameterList = std::vector<Parameter*>;

/// One gradient slot per parameter, each with the parameter's shape.
class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(std::span<Parameter* const> params);

  std::size_t size() const noexcept { return slots_.size(); }
  Tensor* find(const Parameter& p);
  const Tensor* find(const Parameter& p) const;
  Tensor& slot(const Parameter& p);
  const Tensor& slot(const Parameter& p) const;
  Tensor& at(std::size_t i) { return slots_[i]; }
  const Tensor& at(std::size_t i) const { return slots_[i]; }

  void zero();
  void scale(double factor);
  double norm() const;

 private:
  std::vector<const Parameter*> params_;
  std::vector<Tensor> slots_;
  std::unordered_map<const Parameter*, std::size_t> index_;
};

class Graph;

/// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
class Var {
 public:
  Var() = default;

  Graph& graph() const { return *graph_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return graph_ != nullptr; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  double scalar() const;

 private:
  friend class Graph;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

/// Tape of operations recorded in creation order, which is a valid
/// topological order; backward() walks it in reverse. A graph is confined
/// to one thread and is discarded after each forward/backward pass.
class Graph {
 public:
  using Backward = std::function<void(Graph&, std::size_t self)>;

  explicit Graph(bool track_gradients = true) : tracking_(track_gradients) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool tracking() const noexcept { return tracking_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  Var constant(Tensor value);
  /// Leaf referencing `p.value` without copying; one node per parameter.
  Var param(const Parameter& p);
  /// One row of an embedding table; its gradient is scattered back into
  /// the table's slot by accumulate().
  Var lookup(const Parameter& table, std::size_t row);

  Var record(Tensor value, std::vector<std::size_t> inputs, Backward backward);

  const Tensor& value(std::size_t id) const;
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }
  /// Gradient slot of a node, allocated as zeros on first access.
  Tensor& grad(std::size_t id);
  bool has_grad(std::size_t id) const { return !nodes_[id].grad.empty(); }
  const std::vector<std::size_t>& inputs(std::size_t id) const { return nodes_[id].inputs; }

  /// Fills node gradients with d(loss)/d(node). `loss` must be a scalar.
  void backward(Var loss);
  /// Adds scale * d(loss)/d(param) into the slots present in `grads`.
  /// Parameters without a slot (frozen parts) are skipped.
  void accumulate(Gradients& grads, double scale = 1.0) const;

 private:
  static constexpr std::size_t kNoRow = static_cast<std::size_t>(-1);

  struct Node {
    Tensor owned;
    const Tensor* external = nullptr;
    Tensor grad;
    std::vector<std::size_t> inputs;
    Backward backward;
    bool needs_grad = false;
    const Parameter* param = nullptr;
    std::size_t lookup_row = kNoRow;
  };

  bool any_needs_grad(const std::vector<std::size_t>& inputs) const;

  bool tracking_;
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
};

// ---- operations --------------------------------------------------------
// Shapes: vectors are rank 1, matrices rank 2 (rows x cols).

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var scale(Var a, double factor);
Var sum(Var a);         // -> scalar
Var add_all(std::span<const Var> terms);  // same-shape sum
Var dot(Var a, Var b);  // -> scalar

Var matvec(Var m, Var x);              // m [r x c], x [c] -> [r]
Var vecmat(Var x, Var m);              // x [r], m [r x c] -> m^T x [c]
Var affine(Var w, Var x, Var b);       // w x + b
Var linear_rows(Var x, Var w);         // x [T x c], w [r x c] -> x w^T [T x r]
Var linear_rows(Var x, Var w, Var b);  // ... + b on every row

Var row(Var m, std::size_t r);
Var stack_rows(std::span<const Var> rows);
Var concat(std::span<const Var> parts);
Var slice(Var v, std::size_t offset, std::size_t length);

Var sigmoid(Var a);
Var tanh(Var a);
Var softmax(Var a);

/// Inverted dropout: kept entries are scaled by 1/(1-rate). rate == 0 is
/// the identity.
Var dropout(Var a, double rate, Rng& rng);

/// Fused LSTM cell. `gates` holds pre-activations [i f g o] of width 4h,
/// `cell` the previous cell state [h]. Returns [h' ; c'] of width 2h.
Var lstm_cell(Var gates, Var cell);

/// -log softmax(logits)[gold].
Var softmax_cross_entropy(Var logits, std::size_t gold);

/// Cross-entropy over a subset of output rows: logits_k = w[ids_k] . x + b[ids_k].
/// `gold_position` indexes into `ids`.
Var subset_softmax_cross_entropy(Var w, Var b, Var x, std::span<const std::size_t> ids,
                                 std::size_t gold_position);

}  // namespace xnlu
