#include "xnlu/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "eigen_maps.hpp"
#include "xnlu/error.hpp"
#include "xnlu/numeric.hpp"
#include "xnlu/random.hpp"

namespace xnlu {

using detail::as_matrix;
using detail::as_vector;

// ---- Gradients -----------------------------------------------------------

Gradients::Gradients(std::span<Parameter* const> params) {
  params_.reserve(params.size());
  slots_.reserve(params.size());
  for (Parameter* p : params) {
    require(p != nullptr, "null parameter in gradient buffer");
    require(!index_.contains(p), "parameter '" + p->name + "' listed twice");
    index_.emplace(p, params_.size());
    params_.push_back(p);
    slots_.emplace_back(p->value.shape());
  }
}

Tensor* Gradients::find(const Parameter& p) {
  auto it = index_.find(&p);
  return it == index_.end() ? nullptr : &slots_[it->second];
}

const Tensor* Gradients::find(const Parameter& p) const {
  auto it = index_.find(&p);
  return it == index_.end() ? nullptr : &slots_[it->second];
}

Tensor& Gradients::slot(const Parameter& p) {
  Tensor* t = find(p);
  require(t != nullptr, "no gradient slot for parameter '" + p.name + "'");
  return *t;
}

const Tensor& Gradients::slot(const Parameter& p) const {
  const Tensor* t = find(p);
  require(t != nullptr, "no gradient slot for parameter '" + p.name + "'");
  return *t;
}

void Gradients::zero() {
  for (Tensor& t : slots_) t.fill(0.0);
}

void Gradients::scale(double factor) {
  for (Tensor& t : slots_) as_vector(t) *= factor;
}

double Gradients::norm() const {
  double s = 0.0;
  for (const Tensor& t : slots_) s += as_vector(t).squaredNorm();
  return std::sqrt(s);
}

// ---- Var / Graph ---------------------------------------------------------

const Tensor& Var::value() const { return graph_->value(id_); }

double Var::scalar() const {
  const Tensor& v = value();
  require(v.size() == 1, "scalar() on a tensor of shape " + shape_string(v.shape()));
  return v[0];
}

const Tensor& Graph::value(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.external ? *n.external : n.owned;
}

Tensor& Graph::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor(value(id).shape());
  return n.grad;
}

bool Graph::any_needs_grad(const std::vector<std::size_t>& inputs) const {
  if (!tracking_) return false;
  for (std::size_t i : inputs)
    if (nodes_[i].needs_grad) return true;
  return false;
}

Var Graph::constant(Tensor value) {
  Node n;
  n.owned = std::move(value);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Graph::param(const Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return {this, it->second};
  Node n;
  n.external = &p.value;
  n.param = &p;
  n.needs_grad = tracking_;
  nodes_.push_back(std::move(n));
  param_nodes_.emplace(&p, nodes_.size() - 1);
  return {this, nodes_.size() - 1};
}

Var Graph::lookup(const Parameter& table, std::size_t r) {
  require(table.value.rank() == 2, "lookup needs a matrix parameter");
  require(r < table.value.rows(), "lookup row " + std::to_string(r) + " out of range for '" + table.name + "'");
  auto src = table.value.row(r);
  Node n;
  n.owned = Tensor::vector(std::vector<double>(src.begin(), src.end()));
  n.param = &table;
  n.lookup_row = r;
  n.needs_grad = tracking_;
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Graph::record(Tensor value, std::vector<std::size_t> inputs, Backward backward) {
  Node n;
  n.owned = std::move(value);
  n.needs_grad = any_needs_grad(inputs);
  n.inputs = std::move(inputs);
  if (n.needs_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

void Graph::backward(Var loss) {
  require(loss.graph_ == this, "loss belongs to a different graph");
  require(value(loss.id()).size() == 1,
          "backward needs a scalar loss, got shape " + shape_string(value(loss.id()).shape()));
  for (Node& n : nodes_) n.grad = Tensor();
  grad(loss.id())[0] = 1.0;
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.needs_grad || n.grad.empty() || !n.backward) continue;
    n.backward(*this, id);
  }
}

void Graph::accumulate(Gradients& grads, double factor) const {
  for (const Node& n : nodes_) {
    if (n.param == nullptr || n.grad.empty()) continue;
    Tensor* slot = grads.find(*n.param);
    if (slot == nullptr) continue;
    if (n.lookup_row == kNoRow) {
      as_vector(*slot) += factor * as_vector(n.grad);
    } else {
      auto dst = slot->row(n.lookup_row);
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += factor * n.grad[i];
    }
  }
}

// ---- operations ----------------------------------------------------------

namespace {

void require_same_shape(const Var& a, const Var& b, const char* op) {
  require(&a.graph() == &b.graph(), std::string(op) + ": operands from different graphs");
  require(a.shape() == b.shape(), std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                                      shape_string(b.shape()));
}

}  // namespace

Var add(Var a, Var b) {
  require_same_shape(a, b, "add");
  Graph& g = a.graph();
  Tensor out = a.value();
  as_vector(out) += as_vector(b.value());
  return g.record(std::move(out), {a.id(), b.id()}, [](Graph& g, std::size_t self) {
    for (std::size_t in : g.inputs(self))
      if (g.needs_grad(in)) as_vector(g.grad(in)) += as_vector(g.grad(self));
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a, b, "sub");
  Graph& g = a.graph();
  Tensor out = a.value();
  as_vector(out) -= as_vector(b.value());
  return g.record(std::move(out), {a.id(), b.id()}, [](Graph& g, std::size_t self) {
    const auto& in = g.inputs(self);
    if (g.needs_grad(in[0])) as_vector(g.grad(in[0])) += as_vector(g.grad(self));
    if (g.needs_grad(in[1])) as_vector(g.grad(in[1])) -= as_vector(g.grad(self));
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a, b, "mul");
  Graph& g = a.graph();
  Tensor out = a.value();
  as_vector(out).array() *= as_vector(b.value()).array();
  return g.record(std::move(out), {a.id(), b.id()}, [](Graph& g, std::size_t self) {
    const auto& in = g.inputs(self);
    const auto gy = as_vector(g.grad(self)).array();
    if (g.needs_grad(in[0])) as_vector(g.grad(in[0])).array() += gy * as_vector(g.value(in[1])).array();
    if (g.needs_grad(in[1])) as_vector(g.grad(in[1])).array() += gy * as_vector(g.value(in[0])).array();
  });
}

Var scale(Var a, double factor) {
  Graph& g = a.graph();
  Tensor out = a.value();
  as_vector(out) *= factor;
  return g.record(std::move(out), {a.id()}, [factor](Graph& g, std::size_t self) {
    as_vector(g.grad(g.inputs(self)[0])) += factor * as_vector(g.grad(self));
  });
}

Var sum(Var a) {
  Graph& g = a.graph();
  Tensor out = Tensor::vector({as_vector(a.value()).sum()});
  return g.record(std::move(out), {a.id()}, [](Graph& g, std::size_t self) {
    as_vector(g.grad(g.inputs(self)[0])).array() += g.grad(self)[0];
  });
}

Var add_all(std::span<const Var> terms) {
  require(!terms.empty(), "add_all of no terms");
  Graph& g = terms[0].graph();
  Tensor out = terms[0].value();
  std::vector<std::size_t> ids{terms[0].id()};
  for (std::size_t i = 1; i < terms.size(); ++i) {
    require_same_shape(terms[0], terms[i], "add_all");
    as_vector(out) += as_vector(terms[i].value());
    ids.push_back(terms[i].id());
  }
  return g.record(std::move(out), std::move(ids), [](Graph& g, std::size_t self) {
    for (std::size_t in : g.inputs(self))
      if (g.needs_grad(in)) as_vector(g.grad(in)) += as_vector(g.grad(self));
  });
}

Var dot(Var a, Var b) {
  require_same_shape(a, b, "dot");
  Graph& g = a.graph();
  Tensor out = Tensor::vector({as_vector(a.value()).dot(as_vector(b.value()))});
  return g.record(std::move(out), {a.id(), b.id()}, [](Graph& g, std::size_t self) {
    const auto& in = g.inputs(self);
    const double gy = g.grad(self)[0];
    if (g.needs_grad(in[0])) as_vector(g.grad(in[0])) += gy * as_vector(g.value(in[1]));
    if (g.needs_grad(in[1])) as_vector(g.grad(in[1])) += gy * as_vector(g.value(in[0]));
  });
}

Var matvec(Var m, Var x) {
  require(m.value().rank() == 2 && x.value().rank() == 1, "matvec: expects matrix and vector");
  require(m.value().cols() == x.value().size(), "matvec: dimension mismatch " + shape_string(m.shape()) + " * " +
                                                     shape_string(x.shape()));
  Graph& g = m.graph();
  Tensor out({m.value().rows()});
  as_vector(out).noalias() = as_matrix(m.value()) * as_vector(x.value());
  return g.record(std::move(out), {m.id(), x.id()}, [](Graph& g, std::size_t self) {
    const auto& in = g.inputs(self);
    const auto gy = as_vector(g.grad(self));
    if (g.needs_grad(in[0])) as_matrix(g.grad(in[0])).noalias() += gy * as_vector(g.value(in[1])).transpose();
    if (g.needs_grad(in[1])) as_vector(g.grad(in[1])).noalias() += as_matrix(g.value(in[0])).transpose() * gy;
  });
}

Var vecmat(Var x, Var m) {
  require(m.value().rank() == 2 && x.value().rank() == 1, "vecmat: expects vector and matrix");
  require(m.value().rows() == x.value().size(), "vecmat: dimension mismatch " + shape_string(x.shape()) + " * " +
                                                     shape_string(m.shape()));
  Graph& g = m.graph();
  Tensor out({m.value().cols()});
  as_vector(out).noalias() = as_matrix(m.value()).transpose() * as_vector(x.value());
  return g.record(std::move(out), {x.id(), m.id()}, [](Graph& g, std::size_t self) {
    const auto& in = g.inputs(self);
    const auto gy = as_vector(g.grad(self));
    if (g.needs_grad(in[0])) as_vector(g.grad(in[0])).noalias() += as_matrix(g.value(in[1])) * gy;
    if (g.needs_grad(in[1])) as_matrix(g.grad(in[1])).noalias() += as_vector(g.value(in[0])) * gy.transpose();
  });
}

Var affine(Var w, Var x, Var b) {
  require(w.value().rank() == 2 && x.value().rank() == 1, "affine: expects matrix and vector");
  require(w.value().cols() == x.value().size() && b.value().size() == w.value().rows(),
          "affine: dimension mismatch " + shape_string(w.shape()) + " * " + shape_string(x.shape()) + " + " +
              shape_string(b.shape()));
  Graph& g = w.graph();
  Tensor out = b.value();
  as_vector(out).noalias() += as_matrix(w.value()) * as_vector(x.value());
  return g.record(std::move(out), {w.id(), x.id(), b.id()}, [](Graph& g, std::size_t self) {
    const auto& in = g.inputs(self);
    const auto gy = as_vector(g.grad(self));
    if (g.needs_grad(in[0])) as_matrix(g.grad(in[0])).noalias() += gy * as_vector(g.value(in[1])).transpose();
    if (g.needs_grad(in[1])) as_vector(g.grad(in[1])).noalias() += as_matrix(g.value(in[0])).transpose() * gy;
    if (g.needs_grad(in[2])) as_vector(g.grad(in[2])) += gy;
  });
}

namespace {

Var linear_rows_impl(Var x, Var w, const Var* b) {
  require(x.value().rank() == 2 && w.value().rank() == 2, "linear_rows: expects two matrices");
  require(x.value().cols() == w.value().cols(),
          "linear_rows: dimension mismatch " + shape_string(x.shape()) + " vs " + shape_string(w.shape()));
  const std::size_t out_dim = w.value().rows();
  if (b) require(b->value().size() == out_dim, "linear_rows: bias size mismatch");
  Graph& g = x.graph();
  Tensor out({x.value().rows(), out_dim});
  auto o = as_matrix(out);
  o.noalias() = as_matrix(x.value()) * as_matrix(w.value()).transpose();
  if (b) o.rowwise() += as_vector(b->value()).transpose();
  std::vector<std::size_t> ids{x.id(), w.id()};
  if (b) ids.push_back(b->id());
  return g.record(std::move(out), std::move(ids), [](Graph& g, std::size_t self) {
    const auto& in = g.inputs(self);
    const auto gy = as_matrix(g.grad(self));
    if (g.needs_grad(in[0])) as_matrix(g.grad(in[0])).noalias() += gy * as_matrix(g.value(in[1]));
    if (g.needs_grad(in[1])) as_matrix(g.grad(in[1])).noalias() += gy.transpose() * as_matrix(g.value(in[0]));
    if (in.size() > 2 && g.needs_grad(in[2])) as_vector(g.grad(in[2])) += gy.colwise().sum().transpose();
  });
}

}  // namespace

Var linear_rows(Var x, Var w) { return linear_rows_impl(x, w, nullptr); }
Var linear_rows(Var x, Var w, Var b) { return linear_rows_impl(x, w, &b); }

Var row(Var m, std::size_t r) {
  require(m.value().rank() == 2 && r < m.value().rows(), "row: index out of range");
  Graph& g = m.graph();
  auto src = m.value().row(r);
  Tensor out = Tensor::vector(std::vector<double>(src.begin(), src.end()));
  return g.record(std::move(out), {m.id()}, [r](Graph& g, std::size_t self) {
    auto dst = g.grad(g.inputs(self)[0]).row(r);
    const Tensor& gy = g.grad(self);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += gy[i];
  });
}

Var stack_rows(std::span<const Var> rows) {
  require(!rows.empty(), "stack_rows of no rows");
  Graph& g = rows[0].graph();
  const std::size_t width = rows[0].value().size();
  std::vector<double> data;
  data.reserve(rows.size() * width);
  std::vector<std::size_t> ids;
  ids.reserve(rows.size());
  for (const Var& r : rows) {
    require(r.value().rank() == 1 && r.value().size() == width, "stack_rows: rows must be equal-width vectors");
    const auto v = r.value().values();
    data.insert(data.end(), v.begin(), v.end());
    ids.push_back(r.id());
  }
  Tensor out = Tensor::matrix(rows.size(), width, std::move(data));
  return g.record(std::move(out), std::move(ids), [](Graph& g, std::size_t self) {
    const auto& in = g.inputs(self);
    const Tensor& gy = g.grad(self);
    for (std::size_t r = 0; r < in.size(); ++r) {
      if (!g.needs_grad(in[r])) continue;
      Tensor& dst = g.grad(in[r]);
      auto src = gy.row(r);
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] += src[i];
    }
  });
}

Var concat(std::span<const Var> parts) {
  require(!parts.empty(), "concat of no parts");
  Graph& g = parts[0].graph();
  std::vector<double> data;
  std::vector<std::size_t> ids;
  for (const Var& p : parts) {
    require(p.value().rank() == 1, "concat: parts must be vectors");
    const auto v = p.value().values();
    data.insert(data.end(), v.begin(), v.end());
    ids.push_back(p.id());
  }
  Tensor out = Tensor::vector(std::move(data));
  return g.record(std::move(out), std::move(ids), [](Graph& g, std::size_t self) {
    const auto& in = g.inputs(self);
    const Tensor& gy = g.grad(self);
    std::size_t offset = 0;
    for (std::size_t id : in) {
      const std::size_t n = g.value(id).size();
      if (g.needs_grad(id)) {
        Tensor& dst = g.grad(id);
        for (std::size_t i = 0; i < n; ++i) dst[i] += gy[offset + i];
      }
      offset += n;
    }
  });
}

Var slice(Var v, std::size_t offset, std::size_t length) {
  require(v.value().rank() == 1 && length > 0 && offset + length <= v.value().size(), "slice: range out of bounds");
  Graph& g = v.graph();
  const auto src = v.value().values().subspan(offset, length);
  Tensor out = Tensor::vector(std::vector<double>(src.begin(), src.end()));
  return g.record(std::move(out), {v.id()}, [offset, length](Graph& g, std::size_t self) {
    Tensor& dst = g.grad(g.inputs(self)[0]);
    const Tensor& gy = g.grad(self);
    for (std::size_t i = 0; i < length; ++i) dst[offset + i] += gy[i];
  });
}

Var sigmoid(Var a) {
  Graph& g = a.graph();
  Tensor out = a.value();
  for (double& x : out.values()) x = 1.0 / (1.0 + std::exp(-x));
  return g.record(std::move(out), {a.id()}, [](Graph& g, std::size_t self) {
    const auto y = as_vector(g.value(self)).array();
    as_vector(g.grad(g.inputs(self)[0])).array() += as_vector(g.grad(self)).array() * y * (1.0 - y);
  });
}

Var tanh(Var a) {
  Graph& g = a.graph();
  Tensor out = a.value();
  for (double& x : out.values()) x = std::tanh(x);
  return g.record(std::move(out), {a.id()}, [](Graph& g, std::size_t self) {
    const auto y = as_vector(g.value(self)).array();
    as_vector(g.grad(g.inputs(self)[0])).array() += as_vector(g.grad(self)).array() * (1.0 - y * y);
  });
}

Var softmax(Var a) {
  require(a.value().rank() == 1, "softmax: expects a vector");
  Graph& g = a.graph();
  Tensor out = Tensor::vector(xnlu::softmax(a.value().values()));
  return g.record(std::move(out), {a.id()}, [](Graph& g, std::size_t self) {
    const auto y = as_vector(g.value(self));
    const auto gy = as_vector(g.grad(self));
    const double inner = gy.dot(y);
    as_vector(g.grad(g.inputs(self)[0])).array() += y.array() * (gy.array() - inner);
  });
}

Var dropout(Var a, double rate, Rng& rng) {
  require(rate >= 0.0 && rate < 1.0, "dropout rate must be in [0, 1)");
  if (rate == 0.0) return a;
  Graph& g = a.graph();
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(a.value().size());
  for (double& m : mask) m = rng.uniform() < rate ? 0.0 : keep_scale;
  Tensor out = a.value();
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] *= mask[i];
  return g.record(std::move(out), {a.id()}, [mask = std::move(mask)](Graph& g, std::size_t self) {
    Tensor& dst = g.grad(g.inputs(self)[0]);
    const Tensor& gy = g.grad(self);
    for (std::size_t i = 0; i < mask.size(); ++i) dst[i] += gy[i] * mask[i];
  });
}

Var lstm_cell(Var gates, Var cell) {
  const std::size_t h = cell.value().size();
  require(gates.value().rank() == 1 && gates.value().size() == 4 * h,
          "lstm_cell: gates must have width 4 x cell width");
  Graph& g = gates.graph();
  const Tensor& pre = gates.value();
  const Tensor& c_prev = cell.value();
  Tensor out({2 * h});
  for (std::size_t k = 0; k < h; ++k) {
    const double i = 1.0 / (1.0 + std::exp(-pre[k]));
    const double f = 1.0 / (1.0 + std::exp(-pre[h + k]));
    const double cand = std::tanh(pre[2 * h + k]);
    const double o = 1.0 / (1.0 + std::exp(-pre[3 * h + k]));
    const double c = f * c_prev[k] + i * cand;
    out[h + k] = c;
    out[k] = o * std::tanh(c);
  }
  return g.record(std::move(out), {gates.id(), cell.id()}, [h](Graph& g, std::size_t self) {
    const auto& in = g.inputs(self);
    const Tensor& pre = g.value(in[0]);
    const Tensor& c_prev = g.value(in[1]);
    const Tensor& y = g.value(self);
    const Tensor& gy = g.grad(self);
    const bool want_gates = g.needs_grad(in[0]);
    const bool want_cell = g.needs_grad(in[1]);
    Tensor* d_pre = want_gates ? &g.grad(in[0]) : nullptr;
    Tensor* d_cell = want_cell ? &g.grad(in[1]) : nullptr;
    for (std::size_t k = 0; k < h; ++k) {
      const double i = 1.0 / (1.0 + std::exp(-pre[k]));
      const double f = 1.0 / (1.0 + std::exp(-pre[h + k]));
      const double cand = std::tanh(pre[2 * h + k]);
      const double o = 1.0 / (1.0 + std::exp(-pre[3 * h + k]));
      const double tc = std::tanh(y[h + k]);
      const double dh = gy[k];
      const double dc = gy[h + k] + dh * o * (1.0 - tc * tc);
      if (d_pre) {
        (*d_pre)[k] += dc * cand * i * (1.0 - i);
        (*d_pre)[h + k] += dc * c_prev[k] * f * (1.0 - f);
        (*d_pre)[2 * h + k] += dc * i * (1.0 - cand * cand);
        (*d_pre)[3 * h + k] += dh * tc * o * (1.0 - o);
      }
      if (d_cell) (*d_cell)[k] += dc * f;
    }
  });
}

Var softmax_cross_entropy(Var logits, std::size_t gold) {
  require(logits.value().rank() == 1, "softmax_cross_entropy: logits must be a vector");
  require(gold < logits.value().size(), "softmax_cross_entropy: gold index out of range");
  Graph& g = logits.graph();
  const auto z = logits.value().values();
  const double loss = log_sum_exp(z) - z[gold];
  return g.record(Tensor::vector({loss}), {logits.id()}, [gold](Graph& g, std::size_t self) {
    const std::size_t in = g.inputs(self)[0];
    const double gy = g.grad(self)[0];
    const auto p = xnlu::softmax(g.value(in).values());
    Tensor& dz = g.grad(in);
    for (std::size_t k = 0; k < p.size(); ++k) dz[k] += gy * (p[k] - (k == gold ? 1.0 : 0.0));
  });
}

Var subset_softmax_cross_entropy(Var w, Var b, Var x, std::span<const std::size_t> ids, std::size_t gold_position) {
  require(!ids.empty() && gold_position < ids.size(), "subset_softmax_cross_entropy: gold outside candidate set");
  const Tensor& wv = w.value();
  require(wv.rank() == 2 && wv.cols() == x.value().size() && b.value().size() == wv.rows(),
          "subset_softmax_cross_entropy: dimension mismatch");
  Graph& g = w.graph();
  std::vector<std::size_t> rows(ids.begin(), ids.end());
  const auto xv = as_vector(x.value());
  std::vector<double> logits(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    require(rows[k] < wv.rows(), "subset_softmax_cross_entropy: candidate id out of range");
    logits[k] = as_matrix(wv).row(static_cast<Eigen::Index>(rows[k])).dot(xv.transpose()) + b.value()[rows[k]];
  }
  const double loss = log_sum_exp(logits) - logits[gold_position];
  auto probs = xnlu::softmax(logits);
  return g.record(Tensor::vector({loss}), {w.id(), b.id(), x.id()},
                  [rows = std::move(rows), probs = std::move(probs), gold_position](Graph& g, std::size_t self) {
                    const auto& in = g.inputs(self);
                    const double gy = g.grad(self)[0];
                    const Tensor& wv = g.value(in[0]);
                    const Tensor& xv = g.value(in[2]);
                    Tensor* dw = g.needs_grad(in[0]) ? &g.grad(in[0]) : nullptr;
                    Tensor* db = g.needs_grad(in[1]) ? &g.grad(in[1]) : nullptr;
                    Tensor* dx = g.needs_grad(in[2]) ? &g.grad(in[2]) : nullptr;
                    for (std::size_t k = 0; k < rows.size(); ++k) {
                      const double d = gy * (probs[k] - (k == gold_position ? 1.0 : 0.0));
                      const std::size_t r = rows[k];
                      if (db) (*db)[r] += d;
                      if (dw) {
                        auto dst = dw->row(r);
                        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += d * xv[i];
                      }
                      if (dx) {
                        auto src = wv.row(r);
                        for (std::size_t i = 0; i < src.size(); ++i) (*dx)[i] += d * src[i];
                      }
                    }
                  });
}

}  // namespace xnlu
