#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <memory>

#include "helpers.hpp"
#include "xnlu/error.hpp"
#include "xnlu/gradcheck.hpp"
#include "xnlu/synthetic.hpp"
#include "xnlu/tagger.hpp"

namespace xnlu {
namespace {

using testing::TempDir;
using testing::utterance;

TaggerConfig small_config() {
  TaggerConfig c;
  c.hidden = 8;
  c.attention_dim = 6;
  c.epochs = 3;
  c.dropout = 0.0;
  return c;
}

Corpus toy_corpus() {
  return {utterance("1", {"wake", "me", "at", "7am"}, "alarm", "set_alarm", {{3, 4, "datetime"}}),
          utterance("2", {"cancel", "alarm"}, "alarm", "cancel_alarm"),
          utterance("3", {"rain", "in", "paris"}, "weather", "get_weather", {{2, 3, "location"}})};
}

std::shared_ptr<const EmbeddingProvider> zero_provider(const Corpus& corpus, std::size_t dim = 4) {
  return std::make_shared<const EmbeddingProvider>(EmbeddingProvider::zero(tagger_vocabulary(corpus), dim));
}

std::shared_ptr<const StaticVectors> toy_vectors(const TempDir& dir, std::size_t dim) {
  std::ofstream out(dir.file("vectors.txt"));
  Rng rng(3);
  for (const char* w : {"wake", "alarm", "rain", "paris"}) {
    out << w;
    for (std::size_t i = 0; i < dim; ++i) out << ' ' << rng.uniform(-1, 1);
    out << '\n';
  }
  out.close();
  return std::make_shared<const StaticVectors>(StaticVectors::load(dir.file("vectors.txt")));
}

// ---- embeddings ----

TEST(Embedding, DefaultWidths) {
  EXPECT_EQ(default_zero_dim(ProviderKind::zero), 300u);
  EXPECT_EQ(default_zero_dim(ProviderKind::static_concat), 128u);
  EXPECT_EQ(parse_provider_kind("encoder"), ProviderKind::encoder_concat);
  EXPECT_THROW(parse_provider_kind("bert"), PreconditionError);
}

TEST(Embedding, StaticPlusZeroWidth) {
  TempDir dir("emb");
  const Corpus corpus = toy_corpus();
  const auto p = EmbeddingProvider::with_static(tagger_vocabulary(corpus), 128, toy_vectors(dir, 300));
  EXPECT_EQ(p.output_dim(), 428u);
  const Parameter table = p.make_zero_table("t");
  Graph g(false);
  const Tensor e = p.embed(g, corpus[0].tokens, table).value();
  EXPECT_EQ(e.shape(), (Shape{4, 428}));
  for (std::size_t j = 0; j < 428; ++j) EXPECT_EQ(e.at(1, j), 0.0);  // "me" has no vector
  EXPECT_NE(e.at(0, 0), 0.0);
}

TEST(Embedding, ZeroProviderStartsAtZero) {
  const Corpus corpus = toy_corpus();
  const auto p = EmbeddingProvider::zero(tagger_vocabulary(corpus), 300);
  EXPECT_EQ(p.output_dim(), 300u);
  const Parameter table = p.make_zero_table("t");
  Graph g(false);
  const std::vector<std::string> tokens{"wake", "unseen"};
  for (double v : p.embed(g, tokens, table).value().values()) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(p.embed(g, std::vector<std::string>{}, table), PreconditionError);
}

TEST(Embedding, EncoderFeaturesComeFromTheEncoder) {
  const std::vector<ParallelPair> pairs{{{"wake", "me"}, {"x", "y"}, {"es", "en"}}};
  Seq2SeqConfig c;
  c.embedding_dim = 4;
  c.encoder_hidden = 3;
  c.encoder_layers = 1;
  c.decoder_layers = 1;
  c.decoder_hidden = 4;
  Rng rng(2);
  auto model = std::make_shared<const Seq2SeqModel>(Seq2SeqModel::create(c, seq2seq_vocabulary(pairs, c), rng));
  const auto p = EmbeddingProvider::with_encoder(tagger_vocabulary(toy_corpus()), 5, model);
  EXPECT_EQ(p.output_dim(), 11u);
  const std::vector<std::string> tokens{"wake", "me"};
  EXPECT_EQ(p.fixed_features(tokens), encode_contextual(*model, tokens));
}

// ---- losses ----

TEST(JointLoss, ZeroHeadsGiveUniformLoss) {
  const Corpus corpus = toy_corpus();
  TaggerModel m = TaggerModel::create(Schema::infer(corpus), zero_provider(corpus), small_config());
  JointModel& j = m.joint_for("alarm");
  j.intent_weights.value.fill(0.0);
  j.slot_weights.value.fill(0.0);
  Graph g(false);
  const double loss = joint_loss(g, j, *m.provider, corpus[0], false, nullptr).scalar();
  EXPECT_NEAR(loss, std::log(2.0) + 4.0 * std::log(3.0), 1e-12);
}

TEST(JointLoss, InitialLossIsNearUniform) {
  const Corpus corpus = toy_corpus();
  const TaggerModel m = TaggerModel::create(Schema::infer(corpus), zero_provider(corpus), small_config());
  Graph g(false);
  const double uniform = std::log(2.0) + 4.0 * std::log(3.0);
  EXPECT_NEAR(joint_loss(g, m.joint_for("alarm"), *m.provider, corpus[0], false, nullptr).scalar(), uniform,
              0.05 * uniform);
}

TEST(JointLoss, GradientCheck) {
  const Corpus corpus{utterance("1", {"a", "b", "c"}, "d", "i1", {{1, 2, "s"}}), utterance("2", {"c"}, "d", "i2")};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TaggerConfig c = small_config();
    c.hidden = 3;
    c.attention_dim = 2;
    c.seed = seed;
    TaggerModel m = TaggerModel::create(Schema::infer(corpus), zero_provider(corpus, 2), c);
    JointModel& j = m.joint_for("d");
    Rng rng(seed);
    ParameterList params = j.parameters();
    for (Parameter* p : params)
      for (double& v : p->value.values()) v = rng.uniform(-0.5, 0.5);
    auto loss = [&](Graph& g) { return joint_loss(g, j, *m.provider, corpus[0], false, nullptr); };
    EXPECT_LT(grad_check(loss, params).max_relative_error, 1e-4);
  }
}

TEST(ClassifierLoss, GradientCheck) {
  const Corpus corpus = toy_corpus();
  TaggerConfig c = small_config();
  c.hidden = 3;
  c.attention_dim = 2;
  TaggerModel m = TaggerModel::create(Schema::infer(corpus), zero_provider(corpus, 2), c);
  Rng rng(9);
  ParameterList params = m.classifier.parameters();
  for (Parameter* p : params)
    for (double& v : p->value.values()) v = rng.uniform(-0.5, 0.5);
  auto loss = [&](Graph& g) { return classifier_loss(g, m.classifier, *m.provider, corpus[2], false, nullptr); };
  EXPECT_LT(grad_check(loss, params).max_relative_error, 1e-4);
}

TEST(JointLoss, UnknownIntentIsAnError) {
  const Corpus corpus = toy_corpus();
  const TaggerModel m = TaggerModel::create(Schema::infer(corpus), zero_provider(corpus), small_config());
  Graph g(false);
  EXPECT_THROW(joint_loss(g, m.joint_for("alarm"), *m.provider, utterance("x", {"a"}, "alarm", "nope"), false,
                          nullptr),
               PreconditionError);
}

// ---- training ----

Corpus synthetic_corpus(std::size_t n, std::uint64_t seed, std::size_t domains = 2) {
  SyntheticConfig sc;
  sc.domains = domains;
  sc.seed = seed;
  Rng rng(seed, "data");
  return generate_corpus(make_grammar(sc), n, rng, "u");
}

TEST(TrainTagger, OverfitsFiftyUtterances) {
  const Corpus corpus = synthetic_corpus(50, 4);
  TaggerConfig c = small_config();
  c.hidden = 32;
  c.attention_dim = 16;
  c.epochs = 30;
  const auto result = train_tagger(corpus, corpus, zero_provider(corpus, 16), c);
  const MetricReport report = evaluate(corpus, predict_corpus(result.model, corpus));
  EXPECT_GE(report.exact_match, 0.95);
  EXPECT_GE(report.domain_accuracy, 0.99);
}

TEST(TrainTagger, SingleDomain) {
  const Corpus corpus = synthetic_corpus(20, 5, 1);
  const auto result = train_tagger(corpus, corpus, zero_provider(corpus), small_config());
  const auto decision = classify_domain(result.model, corpus[0].tokens);
  ASSERT_EQ(decision.probabilities.size(), 1u);
  EXPECT_EQ(decision.probabilities[0], 1.0);
  EXPECT_EQ(predict_utterance(result.model, corpus[0].tokens).domain, corpus[0].domain);
}

TEST(TrainTagger, DeterministicForASeed) {
  const Corpus corpus = synthetic_corpus(20, 6);
  TaggerConfig c = small_config();
  c.dropout = 0.3;
  const auto a = train_tagger(corpus, corpus, zero_provider(corpus), c);
  const auto b = train_tagger(corpus, corpus, zero_provider(corpus), c);
  EXPECT_EQ(a.model.to_json(), b.model.to_json());
  EXPECT_EQ(a.history.to_json(), b.history.to_json());
}

TEST(TrainTagger, SelectsTheBestDevEpoch) {
  const Corpus corpus = synthetic_corpus(30, 7);
  TaggerConfig c = small_config();
  c.epochs = 4;
  const auto result = train_tagger(corpus, corpus, zero_provider(corpus), c);
  ASSERT_EQ(result.history.classifier.size(), 4u);
  double best = -1;
  std::size_t best_epoch = 0;
  for (const auto& e : result.history.classifier)
    if (e.dev_accuracy > best) {
      best = e.dev_accuracy;
      best_epoch = e.epoch;
    }
  EXPECT_EQ(result.history.classifier_best_epoch, best_epoch);
}

TEST(TrainTagger, FixedFeaturesStayFrozen) {
  TempDir dir("frozen");
  const Corpus corpus = toy_corpus();
  auto vectors = toy_vectors(dir, 3);
  auto provider = std::make_shared<const EmbeddingProvider>(
      EmbeddingProvider::with_static(tagger_vocabulary(corpus), 4, vectors));
  const Tensor before = provider->fixed_features(corpus[0].tokens);
  const auto result = train_tagger(corpus, corpus, provider, small_config());
  EXPECT_EQ(result.model.provider->fixed_features(corpus[0].tokens), before);
  // The trainable part did move.
  double moved = 0.0;
  for (double v : result.model.joint_for("alarm").encoder.zero_table.value.values()) moved += std::abs(v);
  EXPECT_GT(moved, 0.0);
}

TEST(TrainTagger, DevDomainMissingFromTrain) {
  const Corpus corpus = toy_corpus();
  const Corpus train(corpus.begin(), corpus.begin() + 2);
  EXPECT_THROW(train_tagger(train, corpus, zero_provider(corpus), small_config()), PreconditionError);
}

TEST(TaggerCheckpoint, RoundTripPredictsIdentically) {
  TempDir dir("tagger");
  const Corpus corpus = synthetic_corpus(20, 8);
  const auto result = train_tagger(corpus, corpus, zero_provider(corpus), small_config());
  result.model.save(dir.file("tagger.json"));
  const TaggerModel loaded = TaggerModel::load(dir.file("tagger.json"));
  EXPECT_EQ(predict_corpus(loaded, corpus), predict_corpus(result.model, corpus));
  for (const auto& u : corpus)
    EXPECT_EQ(classify_domain(loaded, u.tokens).probabilities, classify_domain(result.model, u.tokens).probabilities);
}

TEST(TaggerConfig, JsonAndValidation) {
  TaggerConfig c;
  EXPECT_EQ(TaggerConfig::from_json(c.to_json()), c);
  c.dropout = 1.0;
  EXPECT_THROW(c.validate(), PreconditionError);
}

}  // namespace
}  // namespace xnlu
