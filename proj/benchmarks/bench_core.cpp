#include <benchmark/benchmark.h>

#include "xnlu/crf.hpp"
#include "xnlu/layers.hpp"
#include "xnlu/optim.hpp"
#include "xnlu/seq2seq.hpp"
#include "xnlu/synthetic.hpp"
#include "xnlu/tagger.hpp"

namespace {

using namespace xnlu;

Tensor random_tensor(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(-1, 1);
  return t;
}

void BM_CrfLogPartition(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0)), labels = static_cast<std::size_t>(state.range(1));
  Rng rng(1);
  const CrfParams p = CrfParams::from_tensors(random_tensor({labels, labels}, rng), random_tensor({labels}, rng),
                                              random_tensor({labels}, rng));
  const Tensor e = random_tensor({len, labels}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(crf_log_partition(e, p));
}
BENCHMARK(BM_CrfLogPartition)->Args({10, 9})->Args({30, 41});

void BM_Viterbi(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0)), labels = static_cast<std::size_t>(state.range(1));
  Rng rng(2);
  const CrfParams p = CrfParams::from_tensors(random_tensor({labels, labels}, rng), random_tensor({labels}, rng),
                                              random_tensor({labels}, rng));
  const Tensor e = random_tensor({len, labels}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(viterbi_decode(e, p));
}
BENCHMARK(BM_Viterbi)->Args({10, 9})->Args({30, 41});

void BM_BiLstmForwardBackward(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  BiLstmStack stack = BiLstmStack::create("enc", 64, hidden, 1, 0.0, rng);
  const Tensor x = random_tensor({12, 64}, rng);
  ParameterList params;
  stack.collect(params);
  Gradients grads(params);
  for (auto _ : state) {
    Graph g;
    Var h = bilstm_encode(g, g.constant(x), stack, false, nullptr);
    g.backward(sum(h));
    g.accumulate(grads);
  }
}
BENCHMARK(BM_BiLstmForwardBackward)->Arg(32)->Arg(128);

void BM_TaggerStep(benchmark::State& state) {
  SyntheticConfig sc;
  Rng rng(4);
  const Corpus corpus = generate_corpus(make_grammar(sc), 8, rng, "b");
  auto provider = std::make_shared<const EmbeddingProvider>(EmbeddingProvider::zero(tagger_vocabulary(corpus), 64));
  TaggerConfig config;
  config.hidden = 64;
  TaggerModel m = TaggerModel::create(Schema::infer(corpus), provider, config);
  JointModel& j = m.joint_for(corpus[0].domain);
  ParameterList params = j.parameters();
  Gradients grads(params);
  OptimizerState opt = OptimizerState::adam(0.01);
  for (auto _ : state) {
    grads.zero();
    Graph g;
    g.backward(joint_loss(g, j, *provider, corpus[0], true, &rng));
    g.accumulate(grads);
    apply_update(opt, params, grads);
  }
}
BENCHMARK(BM_TaggerStep);

void BM_Seq2SeqStep(benchmark::State& state) {
  const auto pairs = substitution_parallel(50, 8, 10, "es", "en", 5);
  Seq2SeqConfig c;
  c.embedding_dim = 32;
  c.encoder_hidden = 32;
  c.encoder_layers = 1;
  c.decoder_hidden = 64;
  c.decoder_layers = 1;
  Rng rng(5);
  Seq2SeqModel m = Seq2SeqModel::create(c, seq2seq_vocabulary(pairs, c), rng);
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < m.vocab.size(); ++i) candidates.push_back(i);
  ParameterList params = m.parameters();
  Gradients grads(params);
  OptimizerState opt = OptimizerState::sgd(0.5);
  for (auto _ : state) {
    grads.zero();
    Graph g;
    g.backward(restricted_sequence_loss(g, m, pairs[0], candidates, true, &rng));
    g.accumulate(grads);
    apply_update(opt, params, grads);
  }
}
BENCHMARK(BM_Seq2SeqStep);

}  // namespace

BENCHMARK_MAIN();
