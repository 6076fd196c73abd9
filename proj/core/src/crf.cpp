#include "xnlu/crf.hpp"

#include <algorithm>
#include <cmath>

#include "xnlu/error.hpp"
#include "xnlu/layers.hpp"
#include "xnlu/numeric.hpp"

namespace xnlu {

CrfParams CrfParams::create(const std::string& name, std::size_t num_labels) {
  require(num_labels >= 1, "CRF needs at least one label");
  return {zero_parameter(name + ".transitions", {num_labels, num_labels}),
          zero_parameter(name + ".start", {num_labels}), zero_parameter(name + ".end", {num_labels})};
}

CrfParams CrfParams::from_tensors(Tensor transitions, Tensor start, Tensor end) {
  CrfParams p{{"crf.transitions", std::move(transitions)}, {"crf.start", std::move(start)}, {"crf.end", std::move(end)}};
  const std::size_t l = p.num_labels();
  require(l >= 1, "CRF needs at least one label");
  require(p.transitions.value.shape() == Shape{l, l} && p.end.value.size() == l, "CRF parameter shapes disagree");
  return p;
}

void CrfParams::collect(ParameterList& out) {
  out.push_back(&transitions);
  out.push_back(&start);
  out.push_back(&end);
}

namespace {

struct ScoreView {
  const Tensor& transitions;
  const Tensor& start;
  const Tensor& end;
};

ScoreView view_of(const CrfParams& p) { return {p.transitions.value, p.start.value, p.end.value}; }

void check_emissions(const Tensor& e, const CrfParams& p) {
  require(e.rank() == 2 && e.rows() >= 1, "CRF emissions must be a non-empty [T x L] matrix");
  require(e.cols() == p.num_labels(), "CRF emissions have " + std::to_string(e.cols()) + " labels, parameters " +
                                          std::to_string(p.num_labels()));
}

// alpha[t][j] = log-sum of all prefixes ending in label j at t (emission at t included).
Tensor forward_scores(const Tensor& e, const ScoreView& p) {
  const std::size_t steps = e.rows(), labels = e.cols();
  const Tensor& trans = p.transitions;
  Tensor alpha({steps, labels});
  for (std::size_t j = 0; j < labels; ++j) alpha.at(0, j) = p.start[j] + e.at(0, j);
  std::vector<double> buf(labels);
  for (std::size_t t = 1; t < steps; ++t) {
    for (std::size_t j = 0; j < labels; ++j) {
      for (std::size_t i = 0; i < labels; ++i) buf[i] = alpha.at(t - 1, i) + trans.at(i, j);
      alpha.at(t, j) = log_sum_exp(buf) + e.at(t, j);
    }
  }
  return alpha;
}

// beta[t][i] = log-sum of all suffixes after t given label i at t (end score included).
Tensor backward_scores(const Tensor& e, const ScoreView& p) {
  const std::size_t steps = e.rows(), labels = e.cols();
  const Tensor& trans = p.transitions;
  Tensor beta({steps, labels});
  for (std::size_t i = 0; i < labels; ++i) beta.at(steps - 1, i) = p.end[i];
  std::vector<double> buf(labels);
  for (std::size_t t = steps - 1; t-- > 0;) {
    for (std::size_t i = 0; i < labels; ++i) {
      for (std::size_t j = 0; j < labels; ++j) buf[j] = trans.at(i, j) + e.at(t + 1, j) + beta.at(t + 1, j);
      beta.at(t, i) = log_sum_exp(buf);
    }
  }
  return beta;
}

double partition_from_alpha(const Tensor& alpha, const ScoreView& p) {
  const std::size_t last = alpha.rows() - 1;
  std::vector<double> buf(alpha.cols());
  for (std::size_t j = 0; j < buf.size(); ++j) buf[j] = alpha.at(last, j) + p.end[j];
  return log_sum_exp(buf);
}

}  // namespace

double crf_path_score(const Tensor& e, const CrfParams& p, std::span<const std::size_t> labels) {
  check_emissions(e, p);
  require(labels.size() == e.rows(), "CRF label sequence length does not match emissions");
  for (std::size_t y : labels) require(y < p.num_labels(), "CRF label " + std::to_string(y) + " out of range");
  double s = p.start.value[labels.front()] + p.end.value[labels.back()];
  for (std::size_t t = 0; t < labels.size(); ++t) {
    s += e.at(t, labels[t]);
    if (t > 0) s += p.transitions.value.at(labels[t - 1], labels[t]);
  }
  return s;
}

double crf_log_partition(const Tensor& e, const CrfParams& p) {
  check_emissions(e, p);
  return partition_from_alpha(forward_scores(e, view_of(p)), view_of(p));
}

Tensor crf_marginals(const Tensor& e, const CrfParams& p) {
  check_emissions(e, p);
  const ScoreView v = view_of(p);
  const Tensor alpha = forward_scores(e, v);
  const Tensor beta = backward_scores(e, v);
  const double log_z = partition_from_alpha(alpha, v);
  Tensor m(e.shape());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::exp(alpha[i] + beta[i] - log_z);
  return m;
}

ViterbiResult viterbi_decode(const Tensor& e, const CrfParams& p) {
  check_emissions(e, p);
  const std::size_t steps = e.rows(), labels = e.cols();
  const Tensor& trans = p.transitions.value;
  Tensor delta({steps, labels});
  std::vector<std::size_t> back(steps * labels, 0);
  for (std::size_t j = 0; j < labels; ++j) delta.at(0, j) = p.start.value[j] + e.at(0, j);
  for (std::size_t t = 1; t < steps; ++t) {
    for (std::size_t j = 0; j < labels; ++j) {
      std::size_t best = 0;
      double best_score = delta.at(t - 1, 0) + trans.at(0, j);
      for (std::size_t i = 1; i < labels; ++i) {
        const double s = delta.at(t - 1, i) + trans.at(i, j);
        if (s > best_score) {
          best_score = s;
          best = i;
        }
      }
      delta.at(t, j) = best_score + e.at(t, j);
      back[t * labels + j] = best;
    }
  }
  ViterbiResult r;
  r.labels.assign(steps, 0);
  std::size_t last = 0;
  double best_score = delta.at(steps - 1, 0) + p.end.value[0];
  for (std::size_t j = 1; j < labels; ++j) {
    const double s = delta.at(steps - 1, j) + p.end.value[j];
    if (s > best_score) {
      best_score = s;
      last = j;
    }
  }
  r.score = best_score;
  r.labels[steps - 1] = last;
  for (std::size_t t = steps - 1; t > 0; --t) r.labels[t - 1] = back[t * labels + r.labels[t]];
  return r;
}

BruteForceResult crf_brute_force(const Tensor& e, const CrfParams& p) {
  check_emissions(e, p);
  const std::size_t steps = e.rows(), labels = e.cols();
  double count = 1.0;
  for (std::size_t t = 0; t < steps; ++t) count *= static_cast<double>(labels);
  require(count <= 1e6, "crf_brute_force: " + std::to_string(labels) + "^" + std::to_string(steps) +
                            " paths exceed the 10^6 enumeration limit");
  const std::size_t total = static_cast<std::size_t>(count);

  auto score_of = [&](const std::vector<std::size_t>& y) {
    long double s = static_cast<long double>(p.start.value[y.front()]) + p.end.value[y.back()];
    for (std::size_t t = 0; t < steps; ++t) {
      s += e.at(t, y[t]);
      if (t > 0) s += p.transitions.value.at(y[t - 1], y[t]);
    }
    return s;
  };
  // Odometer over paths in lexicographic order (position 0 most significant).
  auto advance = [&](std::vector<std::size_t>& y) {
    for (std::size_t t = steps; t-- > 0;) {
      if (++y[t] < labels) return;
      y[t] = 0;
    }
  };

  std::vector<long double> scores(total);
  std::vector<std::size_t> y(steps, 0);
  BruteForceResult r;
  for (std::size_t k = 0; k < total; ++k, advance(y)) {
    scores[k] = score_of(y);
    if (k == 0 || scores[k] > r.best_score) {
      r.best_score = scores[k];
      r.best = y;
    }
  }
  long double m = scores[0];
  for (long double s : scores) m = std::max(m, s);
  long double z = 0.0L;
  for (long double s : scores) z += std::exp(s - m);
  r.log_partition = m + std::log(z);

  std::vector<long double> marg(steps * labels, 0.0L);
  std::fill(y.begin(), y.end(), 0);
  for (std::size_t k = 0; k < total; ++k, advance(y)) {
    const long double prob = std::exp(scores[k] - r.log_partition);
    for (std::size_t t = 0; t < steps; ++t) marg[t * labels + y[t]] += prob;
  }
  r.marginals = Tensor({steps, labels});
  for (std::size_t i = 0; i < marg.size(); ++i) r.marginals[i] = static_cast<double>(marg[i]);
  return r;
}

Var crf_nll(Graph& g, Var emissions, const CrfParams& p, std::span<const std::size_t> gold) {
  const Tensor& e = emissions.value();
  check_emissions(e, p);
  require(gold.size() == e.rows(), "crf_nll: gold sequence length " + std::to_string(gold.size()) +
                                       " != " + std::to_string(e.rows()));
  for (std::size_t y : gold)
    require(y < p.num_labels(), "crf_nll: gold label " + std::to_string(y) + " out of range [0, " +
                                    std::to_string(p.num_labels()) + ")");
  const double loss = crf_log_partition(e, p) - crf_path_score(e, p, gold);
  std::vector<std::size_t> labels(gold.begin(), gold.end());
  Var trans = g.param(p.transitions);
  Var start = g.param(p.start);
  Var end = g.param(p.end);
  return g.record(Tensor::vector({loss}), {emissions.id(), trans.id(), start.id(), end.id()},
                  [labels = std::move(labels)](Graph& g, std::size_t self) {
                    const auto& in = g.inputs(self);
                    const double gy = g.grad(self)[0];
                    const Tensor& e = g.value(in[0]);
                    const ScoreView p{g.value(in[1]), g.value(in[2]), g.value(in[3])};
                    const std::size_t steps = e.rows(), num = e.cols();
                    const Tensor alpha = forward_scores(e, p);
                    const Tensor beta = backward_scores(e, p);
                    const double log_z = partition_from_alpha(alpha, p);
                    if (g.needs_grad(in[0])) {
                      Tensor& de = g.grad(in[0]);
                      for (std::size_t t = 0; t < steps; ++t)
                        for (std::size_t j = 0; j < num; ++j)
                          de.at(t, j) += gy * (std::exp(alpha.at(t, j) + beta.at(t, j) - log_z) -
                                               (labels[t] == j ? 1.0 : 0.0));
                    }
                    if (g.needs_grad(in[1])) {
                      Tensor& dtr = g.grad(in[1]);
                      const Tensor& trans = p.transitions;
                      for (std::size_t t = 1; t < steps; ++t) {
                        for (std::size_t i = 0; i < num; ++i)
                          for (std::size_t j = 0; j < num; ++j)
                            dtr.at(i, j) += gy * std::exp(alpha.at(t - 1, i) + trans.at(i, j) + e.at(t, j) +
                                                          beta.at(t, j) - log_z);
                        dtr.at(labels[t - 1], labels[t]) -= gy;
                      }
                    }
                    if (g.needs_grad(in[2])) {
                      Tensor& ds = g.grad(in[2]);
                      for (std::size_t j = 0; j < num; ++j)
                        ds[j] += gy * std::exp(alpha.at(0, j) + beta.at(0, j) - log_z);
                      ds[labels.front()] -= gy;
                    }
                    if (g.needs_grad(in[3])) {
                      Tensor& dend = g.grad(in[3]);
                      for (std::size_t j = 0; j < num; ++j)
                        dend[j] += gy * std::exp(alpha.at(steps - 1, j) + beta.at(steps - 1, j) - log_z);
                      dend[labels.back()] -= gy;
                    }
                  });
}

}  // namespace xnlu
