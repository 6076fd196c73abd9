#include "xnlu/tagger.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "xnlu/checkpoint.hpp"
#include "xnlu/error.hpp"
#include "xnlu/numeric.hpp"
#include "xnlu/optim.hpp"

namespace xnlu {

void TaggerConfig::validate() const {
  require(epochs >= 1, "tagger needs at least one epoch");
  require(learning_rate > 0.0, "learning rate must be positive");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must be in [0, 1)");
  require(attention_dim > 0 && hidden > 0 && layers >= 1, "tagger dimensions must be positive");
  require(batch_size >= 1, "batch size must be at least 1");
}

nlohmann::json TaggerConfig::to_json() const {
  return {{"epochs", epochs},   {"learning_rate", learning_rate}, {"dropout", dropout},
          {"attention_dim", attention_dim}, {"hidden", hidden}, {"layers", layers},
          {"batch_size", batch_size}, {"clip_norm", clip_norm}, {"seed", seed}};
}

TaggerConfig TaggerConfig::from_json(const nlohmann::json& j) {
  TaggerConfig c;
  try {
    c.epochs = j.value("epochs", c.epochs);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.dropout = j.value("dropout", c.dropout);
    c.attention_dim = j.value("attention_dim", c.attention_dim);
    c.hidden = j.value("hidden", c.hidden);
    c.layers = j.value("layers", c.layers);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.clip_norm = j.value("clip_norm", c.clip_norm);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed tagger config: ") + e.what());
  }
  return c;
}

// ---- model ---------------------------------------------------------------

SentenceEncoder SentenceEncoder::create(const std::string& name, const EmbeddingProvider& provider,
                                        const TaggerConfig& config, Rng& rng) {
  SentenceEncoder e{provider.make_zero_table(name + ".embedding"),
                    BiLstmStack::create(name + ".lstm", provider.output_dim(), config.hidden, config.layers,
                                        config.dropout, rng),
                    {}};
  e.attention = SelfAttentionParams::create(name + ".attention", e.lstm.output_dim(), config.attention_dim, rng);
  return e;
}

void SentenceEncoder::collect(ParameterList& out) {
  out.push_back(&zero_table);
  lstm.collect(out);
  attention.collect(out);
}

ParameterList DomainClassifier::parameters() {
  ParameterList out;
  encoder.collect(out);
  out.push_back(&weights);
  out.push_back(&bias);
  return out;
}

ParameterList JointModel::parameters() {
  ParameterList out;
  encoder.collect(out);
  for (Parameter* p : {&intent_weights, &intent_bias, &slot_weights, &slot_bias}) out.push_back(p);
  crf.collect(out);
  return out;
}

TaggerModel TaggerModel::create(const Schema& schema, std::shared_ptr<const EmbeddingProvider> provider,
                                const TaggerConfig& config) {
  config.validate();
  require(provider != nullptr, "tagger needs an embedding provider");
  require(!schema.domains().empty(), "tagger schema has no domains");
  Rng rng(config.seed, "init");
  TaggerModel m;
  m.config = config;
  m.schema = schema;
  const std::size_t width = 2 * config.hidden;
  for (const DomainSchema& d : schema.domains()) m.classifier.domains.push_back(d.name);
  m.classifier.encoder = SentenceEncoder::create("classifier", *provider, config, rng);
  m.classifier.weights = uniform_parameter("classifier.weights", {m.classifier.domains.size(), width}, rng);
  m.classifier.bias = zero_parameter("classifier.bias", {m.classifier.domains.size()});
  for (const DomainSchema& d : schema.domains()) {
    const std::string prefix = "joint." + d.name;
    JointModel j;
    j.domain = d.name;
    j.intents = d.intents;
    j.slot_types = d.slot_types;
    j.labels = BioLabels(d.slot_types);
    j.encoder = SentenceEncoder::create(prefix, *provider, config, rng);
    j.intent_weights = uniform_parameter(prefix + ".intent.weights", {d.intents.size(), width}, rng);
    j.intent_bias = zero_parameter(prefix + ".intent.bias", {d.intents.size()});
    j.slot_weights = uniform_parameter(prefix + ".slot.weights", {j.labels.size(), width}, rng);
    j.slot_bias = zero_parameter(prefix + ".slot.bias", {j.labels.size()});
    j.crf = CrfParams::create(prefix + ".crf", j.labels.size());
    m.joint.push_back(std::move(j));
  }
  m.provider = std::move(provider);
  return m;
}

const JointModel& TaggerModel::joint_for(const std::string& domain) const {
  for (const JointModel& j : joint)
    if (j.domain == domain) return j;
  throw PreconditionError("no joint model for domain '" + domain + "'");
}

JointModel& TaggerModel::joint_for(const std::string& domain) {
  return const_cast<JointModel&>(std::as_const(*this).joint_for(domain));
}

ParameterList TaggerModel::parameters() {
  ParameterList out = classifier.parameters();
  for (JointModel& j : joint) {
    auto p = j.parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

nlohmann::json TaggerModel::to_json() const {
  nlohmann::json j = make_checkpoint("tagger");
  j["config"] = config.to_json();
  j["schema"] = schema.to_json();
  j["provider"] = provider->to_json();
  store_parameters(j, const_cast<TaggerModel*>(this)->parameters());
  return j;
}

TaggerModel TaggerModel::from_json(const nlohmann::json& j) {
  check_checkpoint(j, "tagger");
  auto provider = std::make_shared<const EmbeddingProvider>(EmbeddingProvider::from_json(j.at("provider")));
  TaggerModel m;
  try {
    m = create(Schema::from_json(j.at("schema")), provider, TaggerConfig::from_json(j.at("config")));
  } catch (const PreconditionError& e) {
    throw DataError(std::string("invalid tagger checkpoint: ") + e.what());
  }
  auto params = m.parameters();
  restore_parameters(j, params);
  return m;
}

void TaggerModel::save(const std::string& path) const { write_json_file(path, to_json()); }

TaggerModel TaggerModel::load(const std::string& path) { return from_json(read_json_file(path)); }

// ---- forward -------------------------------------------------------------

namespace {

struct Encoded {
  Var states;
  Var summary;
};

Encoded run_encoder(Graph& g, const SentenceEncoder& e, const EmbeddingProvider& provider,
                    std::span<const std::string> tokens, bool train, Rng* rng) {
  require(!tokens.empty(), "cannot tag an empty utterance");
  Var states = bilstm_encode(g, provider.embed(g, tokens, e.zero_table), e.lstm, train, rng);
  return {states, self_attention(g, states, e.attention).context};
}

std::size_t index_of(const std::vector<std::string>& names, const std::string& name, const char* what) {
  auto it = std::find(names.begin(), names.end(), name);
  require(it != names.end(), std::string("unknown ") + what + " '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

}  // namespace

Var classifier_loss(Graph& g, const DomainClassifier& m, const EmbeddingProvider& provider,
                    const AnnotatedUtterance& u, bool train_mode, Rng* dropout_rng) {
  const std::size_t gold = index_of(m.domains, u.domain, "domain");
  Encoded enc = run_encoder(g, m.encoder, provider, u.tokens, train_mode, dropout_rng);
  return softmax_cross_entropy(affine(g.param(m.weights), enc.summary, g.param(m.bias)), gold);
}

Var joint_loss(Graph& g, const JointModel& m, const EmbeddingProvider& provider, const AnnotatedUtterance& u,
               bool train_mode, Rng* dropout_rng) {
  const std::size_t intent = index_of(m.intents, u.intent, "intent");
  const auto tags = m.labels.encode(u.slots, u.tokens.size());
  Encoded enc = run_encoder(g, m.encoder, provider, u.tokens, train_mode, dropout_rng);
  Var intent_loss = softmax_cross_entropy(affine(g.param(m.intent_weights), enc.summary, g.param(m.intent_bias)), intent);
  Var emissions = linear_rows(enc.states, g.param(m.slot_weights), g.param(m.slot_bias));
  return add(intent_loss, crf_nll(g, emissions, m.crf, tags));
}

DomainDecision classify_domain(const TaggerModel& model, std::span<const std::string> tokens) {
  Graph g(false);
  Encoded enc = run_encoder(g, model.classifier.encoder, *model.provider, tokens, false, nullptr);
  const Tensor logits =
      affine(g.param(model.classifier.weights), enc.summary, g.param(model.classifier.bias)).value();
  DomainDecision d;
  d.probabilities = softmax(logits.values());
  d.domain = model.classifier.domains[argmax(logits.values())];
  return d;
}

Prediction predict_in_domain(const JointModel& m, const EmbeddingProvider& provider,
                             std::span<const std::string> tokens) {
  Graph g(false);
  Encoded enc = run_encoder(g, m.encoder, provider, tokens, false, nullptr);
  const Tensor intent_logits = affine(g.param(m.intent_weights), enc.summary, g.param(m.intent_bias)).value();
  const Tensor emissions = linear_rows(enc.states, g.param(m.slot_weights), g.param(m.slot_bias)).value();
  Prediction p;
  p.domain = m.domain;
  p.intent = m.intents[argmax(intent_logits.values())];
  p.slots = m.labels.decode(viterbi_decode(emissions, m.crf).labels);
  return p;
}

Prediction predict_utterance(const TaggerModel& model, std::span<const std::string> tokens) {
  require(!tokens.empty(), "cannot tag an empty utterance");
  const std::string domain = classify_domain(model, tokens).domain;
  return predict_in_domain(model.joint_for(domain), *model.provider, tokens);
}

std::vector<Prediction> predict_corpus(const TaggerModel& model, const Corpus& corpus) {
  std::vector<Prediction> out;
  out.reserve(corpus.size());
  for (const AnnotatedUtterance& u : corpus) {
    Prediction p = predict_utterance(model, u.tokens);
    p.id = u.id;
    out.push_back(std::move(p));
  }
  return out;
}

// ---- training ------------------------------------------------------------

namespace {

using LossFn = std::function<Var(Graph&, const AnnotatedUtterance&, bool, Rng*)>;
using MetricFn = std::function<double()>;

struct ComponentEpoch {
  double train_loss;
  double dev_metric;
};

/// Generic Adam loop for one component; restores the best epoch's values.
std::size_t fit_component(const std::string& name, ParameterList params,
                          const std::vector<const AnnotatedUtterance*>& train, bool has_dev, const LossFn& loss_fn,
                          const MetricFn& metric_fn, const TaggerConfig& config,
                          std::vector<ComponentEpoch>& history) {
  Gradients grads(params);
  OptimizerState opt = OptimizerState::adam(config.learning_rate);
  opt.clip_norm = config.clip_norm;
  Rng shuffle(config.seed, "shuffle/" + name);
  Rng drop(config.seed, "dropout/" + name);
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<Tensor> best_values;
  double best_metric = -1.0;
  std::size_t best_epoch = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle.shuffle(order);
    double total = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      grads.zero();
      for (std::size_t k = begin; k < end; ++k) {
        Graph g;
        Var loss = loss_fn(g, *train[order[k]], true, &drop);
        if (!std::isfinite(loss.scalar()))
          throw NumericError("training of '" + name + "' diverged at epoch " + std::to_string(epoch));
        total += loss.scalar();
        g.backward(loss);
        g.accumulate(grads, 1.0 / static_cast<double>(end - begin));
      }
      apply_update(opt, params, grads);
    }
    ComponentEpoch record{total / static_cast<double>(train.size()), has_dev ? metric_fn() : 0.0};
    history.push_back(record);
    if (!has_dev || record.dev_metric > best_metric) {
      best_metric = record.dev_metric;
      best_epoch = epoch;
      best_values.clear();
      for (const Parameter* p : params) best_values.push_back(p->value);
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = std::move(best_values[i]);
  return best_epoch;
}

}  // namespace

nlohmann::ordered_json TaggerHistory::to_json() const {
  nlohmann::ordered_json j;
  nlohmann::ordered_json c = nlohmann::ordered_json::array();
  for (const ClassifierEpoch& e : classifier)
    c.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"dev_accuracy", e.dev_accuracy}});
  j["classifier"] = {{"best_epoch", classifier_best_epoch}, {"epochs", c}};
  nlohmann::ordered_json joints = nlohmann::ordered_json::object();
  for (const auto& [domain, epochs] : joint) {
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const JointEpoch& e : epochs)
      list.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"dev_exact_match", e.dev_exact_match}});
    joints[domain] = {{"best_epoch", joint_best_epoch.at(domain)}, {"epochs", list}};
  }
  j["joint"] = std::move(joints);
  return j;
}

TaggerTrainingResult train_tagger(const Corpus& train, const Corpus& dev,
                                  std::shared_ptr<const EmbeddingProvider> provider, const TaggerConfig& config) {
  config.validate();
  require(!train.empty(), "tagger training set is empty");
  require(!dev.empty(), "tagger dev set is empty");
  const Schema schema = Schema::infer(train);
  for (const AnnotatedUtterance& u : dev)
    require(schema.find(u.domain) != nullptr,
            "dev utterance '" + u.id + "' has domain '" + u.domain + "' which the training data lacks");

  TaggerTrainingResult result;
  TaggerModel& model = result.model;
  model = TaggerModel::create(schema, std::move(provider), config);
  const EmbeddingProvider& prov = *model.provider;

  std::vector<const AnnotatedUtterance*> all;
  for (const AnnotatedUtterance& u : train) all.push_back(&u);
  {
    std::vector<ComponentEpoch> epochs;
    DomainClassifier& c = model.classifier;
    auto loss = [&](Graph& g, const AnnotatedUtterance& u, bool tr, Rng* r) {
      return classifier_loss(g, c, prov, u, tr, r);
    };
    auto metric = [&] {
      std::size_t hits = 0;
      for (const AnnotatedUtterance& u : dev) hits += classify_domain(model, u.tokens).domain == u.domain ? 1 : 0;
      return static_cast<double>(hits) / static_cast<double>(dev.size());
    };
    result.history.classifier_best_epoch =
        fit_component("classifier", c.parameters(), all, true, loss, metric, config, epochs);
    for (std::size_t e = 0; e < epochs.size(); ++e)
      result.history.classifier.push_back({e + 1, epochs[e].train_loss, epochs[e].dev_metric});
  }

  for (JointModel& jm : model.joint) {
    std::vector<const AnnotatedUtterance*> in_domain;
    for (const AnnotatedUtterance& u : train)
      if (u.domain == jm.domain) in_domain.push_back(&u);
    std::vector<const AnnotatedUtterance*> dev_domain;
    for (const AnnotatedUtterance& u : dev)
      if (u.domain == jm.domain) dev_domain.push_back(&u);
    auto loss = [&](Graph& g, const AnnotatedUtterance& u, bool tr, Rng* r) {
      return joint_loss(g, jm, prov, u, tr, r);
    };
    auto metric = [&] {
      std::size_t hits = 0;
      for (const AnnotatedUtterance* u : dev_domain) {
        const Prediction p = predict_in_domain(jm, prov, u->tokens);
        hits += p.intent == u->intent && p.slots == u->slots ? 1 : 0;
      }
      return static_cast<double>(hits) / static_cast<double>(dev_domain.size());
    };
    std::vector<ComponentEpoch> epochs;
    result.history.joint_best_epoch[jm.domain] =
        fit_component("joint/" + jm.domain, jm.parameters(), in_domain, !dev_domain.empty(), loss, metric, config,
                      epochs);
    auto& list = result.history.joint[jm.domain];
    for (std::size_t e = 0; e < epochs.size(); ++e) list.push_back({e + 1, epochs[e].train_loss, epochs[e].dev_metric});
  }
  return result;
}

}  // namespace xnlu
