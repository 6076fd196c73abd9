#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "xnlu/autodiff.hpp"

namespace xnlu {

/// Linear-chain CRF scores over L labels. A path y_0..y_{T-1} scores
///   start[y_0] + sum_t emission[t][y_t] + sum_t transitions[y_{t-1}][y_t] + end[y_{T-1}].
struct CrfParams {
  Parameter transitions;  // [L x L], row = previous label, col = next label
  Parameter start;        // [L]
  Parameter end;          // [L]

  static CrfParams create(const std::string& name, std::size_t num_labels);
  static CrfParams from_tensors(Tensor transitions, Tensor start, Tensor end);
  std::size_t num_labels() const { return start.value.size(); }
  void collect(ParameterList& out);
};

/// Score of one label path under `emissions` [T x L].
double crf_path_score(const Tensor& emissions, const CrfParams& p, std::span<const std::size_t> labels);

/// log of the sum over all L^T paths of exp(path score); forward algorithm.
double crf_log_partition(const Tensor& emissions, const CrfParams& p);

/// Posterior label marginals [T x L] via forward-backward.
Tensor crf_marginals(const Tensor& emissions, const CrfParams& p);

struct ViterbiResult {
  std::vector<std::size_t> labels;
  double score = 0.0;
};

/// Highest-scoring path; ties go to the lowest label index at every
/// backpointer and at the final position.
ViterbiResult viterbi_decode(const Tensor& emissions, const CrfParams& p);

struct BruteForceResult {
  long double log_partition = 0.0L;
  std::vector<std::size_t> best;  // lexicographically first among maximal paths
  long double best_score = 0.0L;
  Tensor marginals;               // [T x L]
};

/// Exhaustive enumeration in extended precision. Test oracle only;
/// throws PreconditionError when L^T exceeds 10^6.
BruteForceResult crf_brute_force(const Tensor& emissions, const CrfParams& p);

/// Negative log-likelihood logZ - score(gold) as a graph node. Gradients
/// reach `emissions` and the CRF parameters.
Var crf_nll(Graph& g, Var emissions, const CrfParams& p, std::span<const std::size_t> gold);

}  // namespace xnlu
