#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "xnlu/crf.hpp"
#include "xnlu/error.hpp"
#include "xnlu/gradcheck.hpp"
#include "xnlu/numeric.hpp"

namespace xnlu {
namespace {

using testing::random_tensor;

CrfParams random_crf(std::size_t labels, Rng& rng) {
  return CrfParams::from_tensors(random_tensor({labels, labels}, rng, 2.0), random_tensor({labels}, rng, 2.0),
                                 random_tensor({labels}, rng, 2.0));
}

// Plain enumeration written independently of the library oracle.
double enumerate_log_partition(const Tensor& e, const CrfParams& p) {
  const std::size_t t_len = e.rows(), l = e.cols();
  std::vector<std::size_t> path(t_len, 0);
  std::vector<double> scores;
  while (true) {
    scores.push_back(crf_path_score(e, p, path));
    std::size_t k = 0;
    while (k < t_len && ++path[k] == l) path[k++] = 0;
    if (k == t_len) break;
  }
  return log_sum_exp(scores);
}

TEST(CrfLogPartition, SingleToken) {
  Rng rng(1);
  const CrfParams p = random_crf(3, rng);
  const Tensor e = random_tensor({1, 3}, rng);
  std::vector<double> terms;
  for (std::size_t y = 0; y < 3; ++y) terms.push_back(p.start.value[y] + e.at(0, y) + p.end.value[y]);
  EXPECT_NEAR(crf_log_partition(e, p), log_sum_exp(terms), 1e-13);
}

TEST(CrfLogPartition, FactorizedChain) {
  Rng rng(2);
  const CrfParams p = CrfParams::create("crf", 4);
  const Tensor e = random_tensor({5, 4}, rng, 3.0);
  double expected = 0.0;
  for (std::size_t t = 0; t < 5; ++t) expected += log_sum_exp(e.row(t));
  EXPECT_NEAR(crf_log_partition(e, p), expected, 1e-12);
}

TEST(CrfLogPartition, MatchesEnumeration) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const CrfParams p = random_crf(3, rng);
    const Tensor e = random_tensor({4, 3}, rng, 2.0);
    EXPECT_NEAR(crf_log_partition(e, p), enumerate_log_partition(e, p), 1e-10);
    EXPECT_NEAR(static_cast<double>(crf_brute_force(e, p).log_partition), enumerate_log_partition(e, p), 1e-10);
  }
}

TEST(CrfLogPartition, ShapeMismatch) {
  const CrfParams p = CrfParams::create("crf", 3);
  EXPECT_THROW(crf_log_partition(Tensor({2, 4}), p), PreconditionError);
}

TEST(CrfNll, UniformScores) {
  const CrfParams p = CrfParams::create("crf", 3);
  Graph g(false);
  const std::vector<std::size_t> gold{0, 2, 1, 1};
  Var loss = crf_nll(g, g.constant(Tensor({4, 3})), p, gold);
  EXPECT_NEAR(loss.scalar(), 4.0 * std::log(3.0), 1e-12);
}

TEST(CrfNll, LargeMarginApproachesZero) {
  const CrfParams p = CrfParams::create("crf", 3);
  Tensor e({3, 3});
  const std::vector<std::size_t> gold{2, 0, 1};
  for (std::size_t t = 0; t < 3; ++t) e.at(t, gold[t]) = 60.0;
  Graph g(false);
  EXPECT_LT(crf_nll(g, g.constant(e), p, gold).scalar(), 1e-20);
}

TEST(CrfNll, LabelOutOfRange) {
  const CrfParams p = CrfParams::create("crf", 3);
  Graph g(false);
  const std::vector<std::size_t> gold{0, 3};
  EXPECT_THROW(crf_nll(g, g.constant(Tensor({2, 3})), p, gold), PreconditionError);
}

TEST(CrfNll, NonNegative) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const CrfParams p = random_crf(4, rng);
    const Tensor e = random_tensor({3, 4}, rng, 3.0);
    std::vector<std::size_t> gold(3);
    for (auto& y : gold) y = rng.index(4);
    Graph g(false);
    EXPECT_GE(crf_nll(g, g.constant(e), p, gold).scalar(), -1e-12);
  }
}

TEST(CrfNll, GradientCheck) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    CrfParams p = random_crf(3, rng);
    Parameter e{"e", random_tensor({4, 3}, rng, 2.0)};
    std::vector<std::size_t> gold(4);
    for (auto& y : gold) y = rng.index(3);
    ParameterList params{&e};
    p.collect(params);
    auto loss = [&](Graph& g) { return crf_nll(g, g.param(e), p, gold); };
    EXPECT_LT(grad_check(loss, params).max_relative_error, 1e-4);
  }
}

TEST(CrfNll, EmissionGradientIsMarginalsMinusGold) {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const CrfParams p = random_crf(3, rng);
    Parameter e{"e", random_tensor({4, 3}, rng, 2.0)};
    std::vector<std::size_t> gold(4);
    for (auto& y : gold) y = rng.index(3);
    Graph g;
    g.backward(crf_nll(g, g.param(e), p, gold));
    ParameterList params{&e};
    Gradients grads(params);
    g.accumulate(grads);
    const Tensor marginals = crf_brute_force(e.value, p).marginals;
    for (std::size_t t = 0; t < 4; ++t)
      for (std::size_t y = 0; y < 3; ++y)
        EXPECT_NEAR(grads.slot(e).at(t, y), marginals.at(t, y) - (gold[t] == y ? 1.0 : 0.0), 1e-8);
  }
}

TEST(Viterbi, NoTransitionsIsPerPositionArgmax) {
  Rng rng(7);
  CrfParams p = CrfParams::create("crf", 4);
  p.start.value = random_tensor({4}, rng);
  p.end.value = random_tensor({4}, rng);
  const Tensor e = random_tensor({3, 4}, rng);
  const auto result = viterbi_decode(e, p);
  for (std::size_t t = 0; t < 3; ++t) {
    std::vector<double> local(e.row(t).begin(), e.row(t).end());
    if (t == 0)
      for (std::size_t y = 0; y < 4; ++y) local[y] += p.start.value[y];
    if (t == 2)
      for (std::size_t y = 0; y < 4; ++y) local[y] += p.end.value[y];
    EXPECT_EQ(result.labels[t], argmax(local));
  }
}

TEST(Viterbi, SingleTokenAndTies) {
  const CrfParams p = CrfParams::create("crf", 2);
  const auto result = viterbi_decode(Tensor({1, 2}), p);
  EXPECT_EQ(result.labels, std::vector<std::size_t>{0});
  const auto brute = crf_brute_force(Tensor({1, 2}), p);
  EXPECT_NEAR(static_cast<double>(brute.log_partition), std::log(2.0), 1e-15);
  EXPECT_EQ(brute.best, std::vector<std::size_t>{0});
  EXPECT_EQ(viterbi_decode(Tensor({3, 3}), CrfParams::create("c", 3)).labels, (std::vector<std::size_t>{0, 0, 0}));
}

TEST(Viterbi, MatchesBruteForce) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const CrfParams p = random_crf(4, rng);
    const Tensor e = random_tensor({5, 4}, rng, 2.0);
    const auto v = viterbi_decode(e, p);
    const auto b = crf_brute_force(e, p);
    EXPECT_EQ(v.labels, b.best);
    EXPECT_NEAR(v.score, static_cast<double>(b.best_score), 1e-12);
    EXPECT_LE(v.score, crf_log_partition(e, p));
  }
}

TEST(Crf, EmissionShiftInvariance) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const CrfParams p = random_crf(3, rng);
    Tensor e = random_tensor({4, 3}, rng, 2.0);
    const double z = crf_log_partition(e, p);
    const auto best = viterbi_decode(e, p).labels;
    const double c = rng.uniform(-5, 5);
    const std::size_t t = rng.index(4);
    for (std::size_t y = 0; y < 3; ++y) e.at(t, y) += c;
    EXPECT_NEAR(crf_log_partition(e, p), z + c, 1e-10);
    EXPECT_EQ(viterbi_decode(e, p).labels, best);
  }
}

TEST(Crf, PathProbabilitiesSumToOne) {
  Rng rng(10);
  const CrfParams p = random_crf(3, rng);
  const Tensor e = random_tensor({3, 3}, rng);
  const double z = crf_log_partition(e, p);
  double total = 0.0;
  std::vector<std::size_t> path(3, 0);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t c = 0; c < 3; ++c) {
        path = {a, b, c};
        const double prob = std::exp(crf_path_score(e, p, path) - z);
        EXPECT_GT(prob, 0.0);
        EXPECT_LE(prob, 1.0);
        total += prob;
      }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(CrfBruteForce, RefusesHugeInstances) {
  const CrfParams p = CrfParams::create("crf", 10);
  EXPECT_THROW(crf_brute_force(Tensor({7, 10}), p), PreconditionError);
}

TEST(CrfMarginals, MatchBruteForce) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const CrfParams p = random_crf(3, rng);
    const Tensor e = random_tensor({4, 3}, rng, 2.0);
    const Tensor m = crf_marginals(e, p);
    const Tensor b = crf_brute_force(e, p).marginals;
    for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(m[i], b[i], 1e-10);
  }
}

}  // namespace
}  // namespace xnlu
