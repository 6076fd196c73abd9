#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xnlu/bio.hpp"
#include "xnlu/crf.hpp"
#include "xnlu/embedding.hpp"
#include "xnlu/eval.hpp"
#include "xnlu/layers.hpp"

namespace xnlu {

struct TaggerConfig {
  std::size_t epochs = 20;
  double learning_rate = 0.01;
  double dropout = 0.3;
  std::size_t attention_dim = 128;
  std::size_t hidden = 256;  // per direction
  std::size_t layers = 1;
  std::size_t batch_size = 8;
  double clip_norm = 5.0;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static TaggerConfig from_json(const nlohmann::json& j);
  friend bool operator==(const TaggerConfig&, const TaggerConfig&) = default;
};

/// Trainable embedding table + biLSTM + self-attention.
struct SentenceEncoder {
  Parameter zero_table;
  BiLstmStack lstm;
  SelfAttentionParams attention;

  static SentenceEncoder create(const std::string& name, const EmbeddingProvider& provider,
                                const TaggerConfig& config, Rng& rng);
  void collect(ParameterList& out);
};

struct DomainClassifier {
  std::vector<std::string> domains;
  SentenceEncoder encoder;
  Parameter weights;  // [domains x 2h]
  Parameter bias;

  ParameterList parameters();
};

/// Intent head on the attention summary, CRF slot head on the token states.
struct JointModel {
  std::string domain;
  std::vector<std::string> intents;
  std::vector<std::string> slot_types;
  BioLabels labels;
  SentenceEncoder encoder;
  Parameter intent_weights;  // [intents x 2h]
  Parameter intent_bias;
  Parameter slot_weights;  // [labels x 2h]
  Parameter slot_bias;
  CrfParams crf;

  ParameterList parameters();
};

struct TaggerModel {
  TaggerConfig config;
  std::shared_ptr<const EmbeddingProvider> provider;
  Schema schema;
  DomainClassifier classifier;
  std::vector<JointModel> joint;

  static TaggerModel create(const Schema& schema, std::shared_ptr<const EmbeddingProvider> provider,
                            const TaggerConfig& config);
  const JointModel& joint_for(const std::string& domain) const;
  JointModel& joint_for(const std::string& domain);
  ParameterList parameters();

  nlohmann::json to_json() const;
  static TaggerModel from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static TaggerModel load(const std::string& path);
};

/// Cross-entropy of the domain classifier on one utterance.
Var classifier_loss(Graph& g, const DomainClassifier& m, const EmbeddingProvider& provider,
                    const AnnotatedUtterance& u, bool train_mode, Rng* dropout_rng);

/// Intent cross-entropy plus CRF negative log-likelihood, unit weights.
Var joint_loss(Graph& g, const JointModel& m, const EmbeddingProvider& provider, const AnnotatedUtterance& u,
               bool train_mode, Rng* dropout_rng);

struct ClassifierEpoch {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double dev_accuracy = 0.0;
};

struct JointEpoch {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double dev_exact_match = 0.0;
};

struct TaggerHistory {
  std::vector<ClassifierEpoch> classifier;
  std::size_t classifier_best_epoch = 0;
  std::map<std::string, std::vector<JointEpoch>> joint;
  std::map<std::string, std::size_t> joint_best_epoch;

  nlohmann::ordered_json to_json() const;
};

struct TaggerTrainingResult {
  TaggerModel model;
  TaggerHistory history;
};

/// Trains the domain classifier on every utterance and one joint model per
/// domain on that domain's utterances with Adam. Each component keeps the
/// epoch that scores best on `dev` (classifier accuracy, joint exact match
/// given the gold domain; earliest epoch on ties). A domain without dev
/// utterances keeps its last epoch.
TaggerTrainingResult train_tagger(const Corpus& train, const Corpus& dev,
                                  std::shared_ptr<const EmbeddingProvider> provider, const TaggerConfig& config);

struct DomainDecision {
  std::string domain;
  std::vector<double> probabilities;
};
DomainDecision classify_domain(const TaggerModel& model, std::span<const std::string> tokens);

/// Intent and slots from one domain's joint model.
Prediction predict_in_domain(const JointModel& m, const EmbeddingProvider& provider,
                             std::span<const std::string> tokens);

Prediction predict_utterance(const TaggerModel& model, std::span<const std::string> tokens);
std::vector<Prediction> predict_corpus(const TaggerModel& model, const Corpus& corpus);

}  // namespace xnlu
