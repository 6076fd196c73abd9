#include "xnlu/seq2seq.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "xnlu/checkpoint.hpp"
#include "xnlu/error.hpp"
#include "xnlu/numeric.hpp"
#include "xnlu/optim.hpp"

namespace xnlu {

std::string to_string(EncoderMode mode) {
  switch (mode) {
    case EncoderMode::cove:
      return "cove";
    case EncoderMode::mult_cove:
      return "mult_cove";
    case EncoderMode::mult_cove_auto:
      return "mult_cove_auto";
  }
  return "cove";
}

EncoderMode parse_encoder_mode(const std::string& text) {
  std::string t = text;
  std::replace(t.begin(), t.end(), '-', '_');
  if (t == "cove") return EncoderMode::cove;
  if (t == "mult_cove") return EncoderMode::mult_cove;
  if (t == "mult_cove_auto") return EncoderMode::mult_cove_auto;
  throw PreconditionError("unknown encoder mode '" + text + "' (expected cove, mult-cove or mult-cove-auto)");
}

Task Task::parse(const std::string& tag) {
  const auto arrow = tag.find("->");
  require(arrow != std::string::npos && arrow > 0 && arrow + 2 < tag.size(),
          "malformed task tag '" + tag + "' (expected e.g. \"es->en\")");
  return {tag.substr(0, arrow), tag.substr(arrow + 2)};
}

// ---- parallel corpora ----------------------------------------------------

std::vector<ParallelPair> parse_parallel(std::istream& in, const std::string& source_name) {
  std::vector<ParallelPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source_name + ":" + std::to_string(line_no) + ": ";
    ParallelPair p;
    try {
      const auto j = nlohmann::json::parse(line);
      p.source = j.at("source_tokens").get<Sentence>();
      p.target = j.at("target_tokens").get<Sentence>();
      p.task = Task::parse(j.at("task").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + "malformed pair: " + e.what());
    } catch (const PreconditionError& e) {
      throw DataError(where + e.what());
    }
    if (p.source.empty() || p.target.empty()) throw DataError(where + "pair with an empty side");
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<ParallelPair> load_parallel(const std::string& path, std::size_t repeat) {
  require(repeat >= 1, "repeat count must be at least 1");
  std::ifstream in(path);
  if (!in) throw DataError("cannot open parallel corpus '" + path + "'");
  auto once = parse_parallel(in, path);
  std::vector<ParallelPair> out;
  out.reserve(once.size() * repeat);
  for (std::size_t r = 0; r < repeat; ++r) out.insert(out.end(), once.begin(), once.end());
  return out;
}

void save_parallel(const std::string& path, std::span<const ParallelPair> pairs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write parallel corpus '" + path + "'");
  for (const ParallelPair& p : pairs) {
    nlohmann::ordered_json j;
    j["source_tokens"] = p.source;
    j["target_tokens"] = p.target;
    j["task"] = p.task.tag();
    out << j.dump() << '\n';
  }
}

std::vector<Task> mode_tasks(EncoderMode mode, const std::string& src, const std::string& pivot) {
  std::vector<Task> tasks{{src, pivot}};
  if (mode != EncoderMode::cove) tasks.push_back({pivot, src});
  if (mode == EncoderMode::mult_cove_auto) {
    tasks.push_back({src, src});
    tasks.push_back({pivot, pivot});
  }
  return tasks;
}

std::vector<ParallelPair> expand_tasks(std::span<const ParallelPair> pairs, EncoderMode mode) {
  std::vector<ParallelPair> out;
  for (const ParallelPair& p : pairs) {
    require(p.task.is_translation(), "expand_tasks expects translation pairs, got " + p.task.tag());
    out.push_back(p);
    if (mode == EncoderMode::cove) continue;
    out.push_back({p.target, p.source, {p.task.target, p.task.source}});
    if (mode == EncoderMode::mult_cove_auto) {
      out.push_back({p.source, p.source, {p.task.source, p.task.source}});
      out.push_back({p.target, p.target, {p.task.target, p.task.target}});
    }
  }
  return out;
}

// ---- config --------------------------------------------------------------

void Seq2SeqConfig::validate() const {
  require(embedding_dim > 0 && encoder_hidden > 0 && decoder_hidden > 0, "seq2seq dimensions must be positive");
  require(encoder_layers >= 1 && decoder_layers >= 1, "seq2seq needs at least one encoder and decoder layer");
  require(!source_language.empty() && !pivot_language.empty(), "seq2seq languages must be named");
  require(source_language != pivot_language, "source and pivot language must differ");
  require(learning_rate > 0.0, "learning rate must be positive");
  require(batch_size >= 1 && vocab_cap >= 1 && max_epochs >= 1, "batch size, vocabulary cap and epochs must be >= 1");
  require(alignment_iterations >= 1, "alignment needs at least one EM iteration");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must be in [0, 1)");
}

nlohmann::json Seq2SeqConfig::to_json() const {
  return {{"embedding_dim", embedding_dim},
          {"encoder_hidden", encoder_hidden},
          {"encoder_layers", encoder_layers},
          {"decoder_layers", decoder_layers},
          {"decoder_hidden", decoder_hidden},
          {"mode", to_string(mode)},
          {"source_language", source_language},
          {"pivot_language", pivot_language},
          {"candidate_limit", candidate_limit},
          {"frequent_words", frequent_words},
          {"max_epochs", max_epochs},
          {"learning_rate", learning_rate},
          {"batch_size", batch_size},
          {"vocab_cap", vocab_cap},
          {"alignment_iterations", alignment_iterations},
          {"dropout", dropout},
          {"clip_norm", clip_norm},
          {"seed", seed}};
}

Seq2SeqConfig Seq2SeqConfig::from_json(const nlohmann::json& j) {
  Seq2SeqConfig c;
  try {
    c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
    c.encoder_hidden = j.value("encoder_hidden", c.encoder_hidden);
    c.encoder_layers = j.value("encoder_layers", c.encoder_layers);
    c.decoder_layers = j.value("decoder_layers", c.decoder_layers);
    c.decoder_hidden = j.value("decoder_hidden", c.decoder_hidden);
    c.mode = parse_encoder_mode(j.value("mode", to_string(c.mode)));
    c.source_language = j.value("source_language", c.source_language);
    c.pivot_language = j.value("pivot_language", c.pivot_language);
    c.candidate_limit = j.value("candidate_limit", c.candidate_limit);
    c.frequent_words = j.value("frequent_words", c.frequent_words);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.vocab_cap = j.value("vocab_cap", c.vocab_cap);
    c.alignment_iterations = j.value("alignment_iterations", c.alignment_iterations);
    c.dropout = j.value("dropout", c.dropout);
    c.clip_norm = j.value("clip_norm", c.clip_norm);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed seq2seq config: ") + e.what());
  }
  return c;
}

// ---- model ---------------------------------------------------------------

namespace {

std::vector<std::string> control_languages(const Seq2SeqConfig& c) {
  std::set<std::string> langs;
  for (const Task& t : c.tasks()) langs.insert(t.target);
  return {langs.begin(), langs.end()};
}

}  // namespace

Seq2SeqModel Seq2SeqModel::create(const Seq2SeqConfig& config, Vocabulary vocab, Rng& rng) {
  config.validate();
  for (const std::string& lang : control_languages(config))
    require(vocab.has_control(lang), "vocabulary lacks the control token for '" + lang + "'");
  const std::size_t V = vocab.size();
  const std::size_t E = config.embedding_dim;
  const std::size_t Hd = config.decoder_hidden;
  Seq2SeqModel m;
  m.config = config;
  m.vocab = std::move(vocab);
  m.source_embedding = uniform_parameter("src_embedding", {V, E}, rng);
  m.target_embedding = uniform_parameter("tgt_embedding", {V, E}, rng);
  m.encoder = BiLstmStack::create("encoder", E, config.encoder_hidden, config.encoder_layers, config.dropout, rng);
  const std::size_t enc_out = m.encoder.output_dim();
  for (std::size_t l = 0; l < config.decoder_layers; ++l)
    m.decoder.push_back(LstmParams::create("decoder.layer" + std::to_string(l), l == 0 ? E + Hd : Hd, Hd, rng));
  m.attention_keys = uniform_parameter("attention.keys", {Hd, enc_out}, rng);
  m.combine_weights = uniform_parameter("attention.combine", {Hd, enc_out + Hd}, rng);
  m.combine_bias = zero_parameter("attention.combine_bias", {Hd});
  m.output_weights = uniform_parameter("output.weights", {V, Hd}, rng);
  m.output_bias = zero_parameter("output.bias", {V});
  return m;
}

ParameterList Seq2SeqModel::parameters() {
  ParameterList out{&source_embedding, &target_embedding};
  encoder.collect(out);
  for (LstmParams& l : decoder) l.collect(out);
  for (Parameter* p : {&attention_keys, &combine_weights, &combine_bias, &output_weights, &output_bias})
    out.push_back(p);
  return out;
}

bool Seq2SeqModel::supports(const Task& task) const {
  const auto tasks = config.tasks();
  return std::find(tasks.begin(), tasks.end(), task) != tasks.end();
}

nlohmann::json Seq2SeqModel::to_json() const {
  nlohmann::json j = make_checkpoint("seq2seq");
  j["config"] = config.to_json();
  j["vocab"] = vocab.to_json();
  auto params = const_cast<Seq2SeqModel*>(this)->parameters();
  store_parameters(j, params);
  return j;
}

Seq2SeqModel Seq2SeqModel::from_json(const nlohmann::json& j) {
  check_checkpoint(j, "seq2seq");
  const Seq2SeqConfig config = Seq2SeqConfig::from_json(j.at("config"));
  Vocabulary vocab = Vocabulary::from_json(j.at("vocab"));
  Rng unused(0);
  Seq2SeqModel m;
  try {
    m = create(config, std::move(vocab), unused);
  } catch (const PreconditionError& e) {
    throw DataError(std::string("invalid seq2seq checkpoint: ") + e.what());
  }
  auto params = m.parameters();
  restore_parameters(j, params);
  return m;
}

void Seq2SeqModel::save(const std::string& path) const { write_json_file(path, to_json()); }

Seq2SeqModel Seq2SeqModel::load(const std::string& path) { return from_json(read_json_file(path)); }

// ---- forward pass --------------------------------------------------------

namespace {

struct Encoded {
  Var states;  // [S x 2He]
  Var keys;    // [S x Hd]
};

struct DecoderState {
  std::vector<LstmState> layers;
  Var attentional;  // previous attentional vector, fed back as input
};

struct StepOutput {
  Var attentional;
  Var weights;
};

Encoded encode(Graph& g, const Seq2SeqModel& m, std::span<const std::size_t> ids, bool train, Rng* rng) {
  require(!ids.empty(), "cannot encode an empty sentence");
  std::vector<Var> rows;
  rows.reserve(ids.size());
  for (std::size_t id : ids) rows.push_back(g.lookup(m.source_embedding, id));
  Var states = bilstm_encode(g, stack_rows(rows), m.encoder, train, rng);
  return {states, linear_rows(states, g.param(m.attention_keys))};
}

DecoderState initial_state(Graph& g, const Seq2SeqModel& m) {
  DecoderState s;
  for (const LstmParams& l : m.decoder) s.layers.push_back(lstm_zero_state(g, l.hidden_dim()));
  s.attentional = g.constant(Tensor({m.config.decoder_hidden}));
  return s;
}

StepOutput decoder_step(Graph& g, const Seq2SeqModel& m, std::size_t input_id, DecoderState& s,
                        const Encoded& enc) {
  const Var in_parts[] = {g.lookup(m.target_embedding, input_id), s.attentional};
  Var x = concat(in_parts);
  for (std::size_t l = 0; l < m.decoder.size(); ++l) {
    s.layers[l] = lstm_step(g, x, s.layers[l], m.decoder[l]);
    x = s.layers[l].h;
  }
  Var weights = softmax(matvec(enc.keys, x));
  Var context = vecmat(weights, enc.states);
  const Var parts[] = {context, x};
  Var attentional = tanh(affine(g.param(m.combine_weights), concat(parts), g.param(m.combine_bias)));
  s.attentional = attentional;
  return {attentional, weights};
}

std::vector<double> full_logits(const Seq2SeqModel& m, const Tensor& attentional) {
  const Tensor& w = m.output_weights.value;
  std::vector<double> logits(w.rows());
  for (std::size_t r = 0; r < logits.size(); ++r) {
    auto wr = w.row(r);
    double acc = m.output_bias.value[r];
    for (std::size_t i = 0; i < wr.size(); ++i) acc += wr[i] * attentional[i];
    logits[r] = acc;
  }
  return logits;
}

void require_task(const Seq2SeqModel& m, const Task& task) {
  require(m.supports(task), "model trained in " + to_string(m.config.mode) + " mode does not support task " +
                                task.tag());
}

std::vector<std::size_t> gold_ids(const Seq2SeqModel& m, const ParallelPair& p) {
  auto ids = m.vocab.encode(p.target);
  ids.push_back(Vocabulary::kEos);
  return ids;
}

}  // namespace

Var restricted_sequence_loss(Graph& g, const Seq2SeqModel& m, const ParallelPair& pair,
                             std::span<const std::size_t> candidates, bool train_mode, Rng* dropout_rng) {
  require_task(m, pair.task);
  require(!pair.target.empty(), "target sentence is empty");
  const auto src = m.vocab.encode(pair.source);
  const auto gold = gold_ids(m, pair);
  Encoded enc = encode(g, m, src, train_mode, dropout_rng);
  DecoderState state = initial_state(g, m);
  Var w = g.param(m.output_weights);
  Var b = g.param(m.output_bias);
  std::vector<Var> losses;
  std::size_t input = m.vocab.control_id(pair.task.target);
  for (std::size_t y : gold) {
    StepOutput out = decoder_step(g, m, input, state, enc);
    auto it = std::lower_bound(candidates.begin(), candidates.end(), y);
    require(it != candidates.end() && *it == y, "gold token '" + m.vocab.token(y) + "' missing from candidates");
    losses.push_back(subset_softmax_cross_entropy(w, b, out.attentional, candidates,
                                                  static_cast<std::size_t>(it - candidates.begin())));
    input = y;
  }
  return add_all(losses);
}

std::vector<NormalizerPair> log_normalizers(const Seq2SeqModel& m, const ParallelPair& pair,
                                            std::span<const std::size_t> candidates) {
  require_task(m, pair.task);
  Graph g(false);
  const auto src = m.vocab.encode(pair.source);
  Encoded enc = encode(g, m, src, false, nullptr);
  DecoderState state = initial_state(g, m);
  std::vector<NormalizerPair> out;
  std::size_t input = m.vocab.control_id(pair.task.target);
  for (std::size_t y : gold_ids(m, pair)) {
    StepOutput step = decoder_step(g, m, input, state, enc);
    const auto logits = full_logits(m, step.attentional.value());
    std::vector<double> restricted;
    for (std::size_t c : candidates) restricted.push_back(logits.at(c));
    out.push_back({log_sum_exp(restricted), log_sum_exp(logits)});
    input = y;
  }
  return out;
}

NllTotals sequence_nll(const Seq2SeqModel& m, const ParallelPair& pair) {
  require_task(m, pair.task);
  Graph g(false);
  const auto src = m.vocab.encode(pair.source);
  Encoded enc = encode(g, m, src, false, nullptr);
  DecoderState state = initial_state(g, m);
  NllTotals totals;
  std::size_t input = m.vocab.control_id(pair.task.target);
  for (std::size_t y : gold_ids(m, pair)) {
    StepOutput step = decoder_step(g, m, input, state, enc);
    const auto logits = full_logits(m, step.attentional.value());
    totals.nll += log_sum_exp(logits) - logits[y];
    ++totals.tokens;
    input = y;
  }
  return totals;
}

double perplexity(const Seq2SeqModel& model, std::span<const ParallelPair> pairs, const Task& task) {
  require_task(model, task);
  require(!pairs.empty(), "perplexity of an empty set");
  NllTotals total;
  for (const ParallelPair& p : pairs) {
    require(p.task == task, "pair tagged " + p.task.tag() + " in a " + task.tag() + " perplexity evaluation");
    const NllTotals t = sequence_nll(model, p);
    total.nll += t.nll;
    total.tokens += t.tokens;
  }
  return std::exp(total.nll / static_cast<double>(total.tokens));
}

std::map<std::string, double> perplexity_by_task(const Seq2SeqModel& model, std::span<const ParallelPair> pairs) {
  std::map<std::string, NllTotals> totals;
  for (const ParallelPair& p : pairs) {
    const NllTotals t = sequence_nll(model, p);
    NllTotals& acc = totals[p.task.tag()];
    acc.nll += t.nll;
    acc.tokens += t.tokens;
  }
  std::map<std::string, double> out;
  for (const auto& [tag, t] : totals) out[tag] = std::exp(t.nll / static_cast<double>(t.tokens));
  return out;
}

Tensor encode_contextual(const Seq2SeqModel& model, std::span<const std::string> tokens) {
  require(!tokens.empty(), "encode_contextual: empty input");
  Graph g(false);
  const auto ids = model.vocab.encode(tokens);
  return encode(g, model, ids, false, nullptr).states.value();
}

// ---- decoding ------------------------------------------------------------

namespace {

struct Hypothesis {
  std::vector<std::size_t> tokens;
  std::vector<std::vector<double>> attention;
  DecoderState state;
  double score = 0.0;
};

bool emittable(const Vocabulary& v, std::size_t id) {
  return id == Vocabulary::kUnk || id == Vocabulary::kEos || !v.is_reserved(id);
}

}  // namespace

Translation translate_with_attention(const Seq2SeqModel& model, std::span<const std::string> tokens,
                                     const Task& task, std::size_t beam) {
  require(beam >= 1, "beam size must be at least 1");
  require(!tokens.empty(), "cannot translate an empty sentence");
  require_task(model, task);
  Graph g(false);
  const auto src = model.vocab.encode(tokens);
  const Encoded enc = encode(g, model, src, false, nullptr);
  const std::size_t max_len = 2 * tokens.size() + 5;
  const std::size_t start = model.vocab.control_id(task.target);

  auto search = [&](std::size_t width) {
    std::vector<Hypothesis> live(1);
    live[0].state = initial_state(g, model);
    std::vector<Hypothesis> finished;

    struct Expansion {
      std::size_t parent;
      std::size_t token;
      double score;
    };

    for (std::size_t step = 0; step <= max_len && !live.empty(); ++step) {
      std::vector<Expansion> expansions;
      std::vector<StepOutput> outputs;
      for (std::size_t h = 0; h < live.size(); ++h) {
        const std::size_t input = live[h].tokens.empty() ? start : live[h].tokens.back();
        outputs.push_back(decoder_step(g, model, input, live[h].state, enc));
        auto logits = full_logits(model, outputs.back().attentional.value());
        const double z = log_sum_exp(logits);
        if (step == max_len) {
          expansions.push_back({h, Vocabulary::kEos, live[h].score + logits[Vocabulary::kEos] - z});
          continue;
        }
        std::vector<std::size_t> order;
        for (std::size_t id = 0; id < logits.size(); ++id)
          if (emittable(model.vocab, id)) order.push_back(id);
        const std::size_t k = std::min(width, order.size());
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                          [&](std::size_t a, std::size_t b) { return logits[a] != logits[b] ? logits[a] > logits[b] : a < b; });
        for (std::size_t i = 0; i < k; ++i) expansions.push_back({h, order[i], live[h].score + logits[order[i]] - z});
      }
      std::stable_sort(expansions.begin(), expansions.end(),
                       [](const Expansion& a, const Expansion& b) { return a.score > b.score; });
      if (expansions.size() > width) expansions.resize(width);

      std::vector<Hypothesis> next;
      for (const Expansion& e : expansions) {
        Hypothesis h;
        h.tokens = live[e.parent].tokens;
        h.attention = live[e.parent].attention;
        h.state = live[e.parent].state;
        h.score = e.score;
        if (e.token == Vocabulary::kEos) {
          finished.push_back(std::move(h));
        } else {
          const auto& w = outputs[e.parent].weights.value();
          h.attention.emplace_back(w.storage().begin(), w.storage().end());
          h.tokens.push_back(e.token);
          next.push_back(std::move(h));
        }
      }
      live = std::move(next);
      // Scores only fall as hypotheses grow, so this finished one is final.
      if (!finished.empty() && !live.empty()) {
        double best_finished = -std::numeric_limits<double>::infinity();
        for (const Hypothesis& h : finished) best_finished = std::max(best_finished, h.score);
        double best_live = -std::numeric_limits<double>::infinity();
        for (const Hypothesis& h : live) best_live = std::max(best_live, h.score);
        if (best_finished >= best_live) break;
      }
    }

    const Hypothesis* best = nullptr;
    for (const Hypothesis& h : finished)
      if (best == nullptr || h.score > best->score) best = &h;
    return *best;
  };

  // Fall back to the greedy hypothesis when it scores higher.
  Hypothesis chosen = search(beam);
  if (beam > 1) {
    Hypothesis greedy = search(1);
    if (greedy.score > chosen.score) chosen = std::move(greedy);
  }
  Translation out;
  out.score = chosen.score;
  for (std::size_t id : chosen.tokens) out.tokens.push_back(model.vocab.token(id));
  if (!chosen.attention.empty()) {
    std::vector<double> flat;
    for (const auto& row : chosen.attention) flat.insert(flat.end(), row.begin(), row.end());
    out.attention = Tensor::matrix(chosen.attention.size(), tokens.size(), std::move(flat));
  }
  return out;
}

double sequence_score(const Seq2SeqModel& model, std::span<const std::string> tokens,
                      std::span<const std::string> output, const Task& task) {
  ParallelPair p{Sentence(tokens.begin(), tokens.end()), Sentence(output.begin(), output.end()), task};
  require_task(model, task);
  Graph g(false);
  const auto src = model.vocab.encode(p.source);
  Encoded enc = encode(g, model, src, false, nullptr);
  DecoderState state = initial_state(g, model);
  auto gold = model.vocab.encode(p.target);
  gold.push_back(Vocabulary::kEos);
  double score = 0.0;
  std::size_t input = model.vocab.control_id(task.target);
  for (std::size_t y : gold) {
    StepOutput step = decoder_step(g, model, input, state, enc);
    const auto logits = full_logits(model, step.attentional.value());
    score += logits[y] - log_sum_exp(logits);
    input = y;
  }
  return score;
}

// ---- training ------------------------------------------------------------

Vocabulary seq2seq_vocabulary(std::span<const ParallelPair> train, const Seq2SeqConfig& config) {
  std::vector<std::string> languages{config.source_language, config.pivot_language};
  std::vector<std::vector<Sentence>> per_language(languages.size());
  auto slot = [&](const std::string& lang) -> std::vector<Sentence>* {
    for (std::size_t i = 0; i < languages.size(); ++i)
      if (languages[i] == lang) return &per_language[i];
    return nullptr;
  };
  for (const ParallelPair& p : train) {
    if (auto* s = slot(p.task.source)) s->push_back(p.source);
    if (auto* t = slot(p.task.target)) t->push_back(p.target);
  }
  return build_union_vocab(per_language, config.vocab_cap, control_languages(config));
}

namespace {

std::vector<std::size_t> frequent_targets(std::span<const ParallelPair> train, const Vocabulary& vocab,
                                          std::size_t count) {
  std::vector<Sentence> targets;
  for (const ParallelPair& p : train) targets.push_back(p.target);
  std::vector<std::size_t> ids;
  for (const auto& [token, n] : token_frequencies(targets)) {
    if (ids.size() == count) break;
    const std::size_t id = vocab.id(token);
    if (!vocab.is_reserved(id)) ids.push_back(id);
  }
  return ids;
}

double selection_value(const std::map<std::string, double>& ppl) {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& [tag, value] : ppl) {
    if (!Task::parse(tag).is_translation()) continue;
    total += value;
    ++n;
  }
  return total / static_cast<double>(n);
}

}  // namespace

Seq2SeqTrainingResult train_seq2seq(std::span<const ParallelPair> train, std::span<const ParallelPair> dev,
                                    const Seq2SeqConfig& config, const std::function<void(const EpochLog&)>& on_epoch) {
  config.validate();
  require(!train.empty(), "seq2seq training set is empty");
  require(!dev.empty(), "seq2seq dev set is empty");
  const auto tasks = config.tasks();
  auto check_tasks = [&](std::span<const ParallelPair> pairs, const char* which) {
    for (const ParallelPair& p : pairs)
      require(std::find(tasks.begin(), tasks.end(), p.task) != tasks.end(),
              std::string(which) + " pair tagged " + p.task.tag() + " is outside the " + to_string(config.mode) +
                  " task set");
  };
  check_tasks(train, "training");
  check_tasks(dev, "dev");
  require(std::any_of(dev.begin(), dev.end(), [](const ParallelPair& p) { return p.task.is_translation(); }),
          "dev set needs at least one translation pair for model selection");

  Seq2SeqTrainingResult result;
  std::vector<SentencePair> translation_pairs;
  for (const ParallelPair& p : train)
    if (p.task.is_translation()) translation_pairs.push_back({p.source, p.target});
  if (!translation_pairs.empty()) result.lexicon = ibm1_lexicon(translation_pairs, config.alignment_iterations);

  Rng init(config.seed, "init");
  Rng shuffle(config.seed, "shuffle");
  Rng drop(config.seed, "dropout");
  Seq2SeqModel model = Seq2SeqModel::create(config, seq2seq_vocabulary(train, config), init);
  const auto frequent = frequent_targets(train, model.vocab, config.frequent_words);

  ParameterList params = model.parameters();
  Gradients grads(params);
  OptimizerState opt = OptimizerState::sgd(config.learning_rate);
  opt.clip_norm = config.clip_norm;
  std::vector<Tensor> best_values;
  double best = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    EpochLog log;
    log.epoch = epoch;
    log.learning_rate = opt.learning_rate;
    shuffle.shuffle(order);
    double loss_sum = 0.0;
    std::size_t token_count = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      std::vector<std::size_t> candidates;
      for (std::size_t k = begin; k < end; ++k) {
        const ParallelPair& p = train[order[k]];
        auto c = build_output_candidates(p.source, result.lexicon, frequent, model.vocab, config.candidate_limit);
        candidates.insert(candidates.end(), c.begin(), c.end());
        for (std::size_t y : gold_ids(model, p)) candidates.push_back(y);
      }
      std::sort(candidates.begin(), candidates.end());
      candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

      grads.zero();
      const double weight = 1.0 / static_cast<double>(end - begin);
      for (std::size_t k = begin; k < end; ++k) {
        const ParallelPair& p = train[order[k]];
        Graph g;
        Var loss = restricted_sequence_loss(g, model, p, candidates, true, &drop);
        if (!std::isfinite(loss.scalar()))
          throw NumericError("seq2seq training diverged at epoch " + std::to_string(epoch));
        loss_sum += loss.scalar();
        token_count += p.target.size() + 1;
        g.backward(loss);
        g.accumulate(grads, weight);
      }
      apply_update(opt, params, grads);
    }
    log.train_loss = loss_sum / static_cast<double>(token_count);
    log.dev_perplexity = perplexity_by_task(model, dev);
    log.selection_perplexity = selection_value(log.dev_perplexity);
    if (!std::isfinite(log.selection_perplexity))
      throw NumericError("seq2seq dev perplexity is not finite at epoch " + std::to_string(epoch));
    if (log.selection_perplexity < best) {
      best = log.selection_perplexity;
      result.best_epoch = epoch;
      best_values.clear();
      for (const Parameter* p : params) best_values.push_back(p->value);
    }
    log.decayed = sgd_ppl_decay(opt, log.selection_perplexity);
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);
  }
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = std::move(best_values[i]);
  result.model = std::move(model);
  return result;
}

}  // namespace xnlu
