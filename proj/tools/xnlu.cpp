#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "xnlu/checkpoint.hpp"
#include "xnlu/corpus.hpp"
#include "xnlu/embedding.hpp"
#include "xnlu/error.hpp"
#include "xnlu/eval.hpp"
#include "xnlu/experiment.hpp"
#include "xnlu/lexicon.hpp"
#include "xnlu/seq2seq.hpp"
#include "xnlu/tagger.hpp"
#include "xnlu/tokenize.hpp"
#include "xnlu/transfer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace xnlu;

namespace {

std::size_t default_threads() {
  if (const char* env = std::getenv("XNLU_THREADS")) {
    try {
      const long n = std::stol(env);
      if (n > 0) return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

void note(const std::string& message) { std::cerr << message << '\n'; }

std::ofstream open_output(const std::string& path) {
  if (fs::path parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  return out;
}

// A record read from a sentence file: JSON lines carrying "tokens", or raw text lines.
struct SentenceRecord {
  std::string id;
  Sentence tokens;
};

std::vector<SentenceRecord> read_sentences(const std::string& path, const std::string& language,
                                           const TokenizerOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<SentenceRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    SentenceRecord r;
    if (line[first] == '{') {
      try {
        const json j = json::parse(line);
        r.tokens = j.at("tokens").get<Sentence>();
        r.id = j.value("id", std::to_string(out.size()));
      } catch (const json::exception& e) {
        throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
      }
    } else {
      r.id = std::to_string(out.size());
      r.tokens = tokenize(line, language, options);
    }
    out.push_back(std::move(r));
  }
  return out;
}

// FILE or FILE@N, the latter repeating the file N times.
std::pair<std::string, std::size_t> split_repeat(const std::string& spec) {
  const auto at = spec.rfind('@');
  if (at == std::string::npos || at + 1 == spec.size()) return {spec, 1};
  const std::string count = spec.substr(at + 1);
  if (count.find_first_not_of("0123456789") != std::string::npos) return {spec, 1};
  const std::size_t n = std::stoul(count);
  require(n > 0, "repeat count in '" + spec + "' must be positive");
  return {spec.substr(0, at), n};
}

std::vector<ParallelPair> load_parallel_specs(const std::vector<std::string>& specs) {
  std::vector<ParallelPair> out;
  for (const std::string& spec : specs) {
    auto [path, repeat] = split_repeat(spec);
    auto pairs = load_parallel(path, repeat);
    out.insert(out.end(), pairs.begin(), pairs.end());
  }
  return out;
}

// ---- prepare -------------------------------------------------------------

struct PrepareArgs {
  std::string input, output, format = "text", language = "en", lexicon, schema;
  std::size_t max_tokens = 100;
  bool keep_case = false;
};

int cmd_prepare(const PrepareArgs& a) {
  if (a.format == "text") {
    WordLexicon lexicon;
    TokenizerOptions options;
    options.lowercase = !a.keep_case;
    if (!a.lexicon.empty()) {
      lexicon = WordLexicon::load(a.lexicon);
      options.lexicon = &lexicon;
    }
    std::vector<Sentence> sentences;
    for (auto& r : read_sentences(a.input, a.language, options)) sentences.push_back(std::move(r.tokens));
    const std::size_t before = sentences.size();
    const auto kept = preprocess_corpus(sentences, a.max_tokens);
    std::ofstream file;
    if (!a.output.empty()) file = open_output(a.output);
    std::ostream& out = a.output.empty() ? std::cout : file;
    for (const Sentence& s : kept) out << json{{"tokens", s}}.dump() << '\n';
    note("kept " + std::to_string(kept.size()) + " of " + std::to_string(before) + " sentences");
    return 0;
  }
  if (a.format == "corpus") {
    std::optional<Schema> schema;
    if (!a.schema.empty()) schema = Schema::load(a.schema);
    Corpus corpus = load_corpus(a.input, schema ? &*schema : nullptr);
    json counts = json::object();
    for (const auto& [domain, n] : count_by_domain(corpus)) counts[domain] = n;
    std::cout << json{{"utterances", corpus.size()}, {"domains", counts}}.dump() << '\n';
    if (!a.output.empty()) open_output(a.output) << serialize_corpus(corpus);
    return 0;
  }
  if (a.format == "parallel") {
    const auto pairs = load_parallel(a.input);
    std::vector<ParallelPair> kept;
    std::set<std::pair<Sentence, Sentence>> seen;
    for (const ParallelPair& p : pairs) {
      ParallelPair q = p;
      for (auto& t : q.source) t = utf8_lowercase(t);
      for (auto& t : q.target) t = utf8_lowercase(t);
      if (q.source.size() > a.max_tokens || q.target.size() > a.max_tokens) continue;
      if (q.source.empty() || q.target.empty()) continue;
      if (!seen.insert({q.source, q.target}).second) continue;
      kept.push_back(std::move(q));
    }
    require(!a.output.empty(), "prepare --format parallel needs -o");
    save_parallel(a.output, kept);
    note("kept " + std::to_string(kept.size()) + " of " + std::to_string(pairs.size()) + " pairs");
    return 0;
  }
  throw PreconditionError("unknown prepare format '" + a.format + "' (expected text, corpus or parallel)");
}

// ---- align ---------------------------------------------------------------

int cmd_align(const std::vector<std::string>& inputs, std::size_t iterations, const std::string& output) {
  std::vector<SentencePair> pairs;
  for (const ParallelPair& p : load_parallel_specs(inputs))
    if (p.task.is_translation()) pairs.push_back({p.source, p.target});
  require(!pairs.empty(), "no translation pairs to align");
  write_json_file(output, ibm1_lexicon(pairs, iterations).to_json());
  return 0;
}

// ---- train-encoder -------------------------------------------------------

int cmd_train_encoder(const std::vector<std::string>& train_specs, const std::vector<std::string>& dev_specs,
                      const Seq2SeqConfig& config, bool expand, const std::string& output,
                      const std::string& log_path) {
  config.validate();
  auto train = load_parallel_specs(train_specs);
  auto dev = load_parallel_specs(dev_specs);
  if (expand) {
    train = expand_tasks(train, config.mode);
    dev = expand_tasks(dev, config.mode);
  }
  std::ofstream log;
  if (!log_path.empty()) log = open_output(log_path);
  auto on_epoch = [&](const EpochLog& e) {
    json j = {{"epoch", e.epoch},
              {"learning_rate", e.learning_rate},
              {"train_loss", e.train_loss},
              {"dev_perplexity", e.dev_perplexity},
              {"selection_perplexity", e.selection_perplexity},
              {"decayed", e.decayed}};
    note(j.dump());
    if (log) log << j.dump() << '\n' << std::flush;
  };
  auto result = train_seq2seq(train, dev, config, on_epoch);
  result.model.save(output);
  note("selected epoch " + std::to_string(result.best_epoch));
  return 0;
}

// ---- encode --------------------------------------------------------------

int cmd_encode(const std::string& model_path, const std::string& input, const std::string& language,
               const std::string& output) {
  const Seq2SeqModel model = Seq2SeqModel::load(model_path);
  std::ofstream out = open_output(output);
  for (const SentenceRecord& r : read_sentences(input, language, {})) {
    const Tensor vectors = encode_contextual(model, r.tokens);
    json rows = json::array();
    for (std::size_t t = 0; t < vectors.rows(); ++t) {
      auto row = vectors.row(t);
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    out << json{{"id", r.id}, {"tokens", r.tokens}, {"vectors", rows}}.dump() << '\n';
  }
  return 0;
}

// ---- translate -----------------------------------------------------------

int cmd_translate(const std::string& model_path, const std::string& input, const std::string& task_tag,
                  std::size_t beam, bool emit_attention, const std::string& output) {
  const Seq2SeqModel model = Seq2SeqModel::load(model_path);
  const Task task = Task::parse(task_tag);
  require(model.supports(task), "model was not trained for task " + task.tag());
  std::ofstream out = open_output(output);
  for (const SentenceRecord& r : read_sentences(input, task.source, {})) {
    const Translation tr = translate_with_attention(model, r.tokens, task, beam);
    json j = {{"id", r.id}, {"source_tokens", r.tokens}, {"tokens", tr.tokens}, {"score", tr.score}};
    if (emit_attention) {
      json rows = json::array();
      for (std::size_t t = 0; t < tr.tokens.size(); ++t) {
        auto row = tr.attention.row(t);
        rows.push_back(std::vector<double>(row.begin(), row.end()));
      }
      j["attention"] = rows;
    }
    out << j.dump() << '\n';
  }
  return 0;
}

// ---- project -------------------------------------------------------------

int cmd_project(const std::string& corpus_path, const std::string& translations_path,
                const std::string& language, const std::string& output) {
  const Corpus corpus = load_corpus(corpus_path);
  std::map<std::string, json> translations;
  {
    std::ifstream in(translations_path);
    if (!in) throw DataError("cannot open '" + translations_path + "'");
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception& e) {
        throw DataError(translations_path + ": " + e.what());
      }
      const std::string id = j.value("id", "");
      translations[id] = std::move(j);
    }
  }
  Corpus projected;
  std::size_t dropped = 0;
  for (const AnnotatedUtterance& u : corpus) {
    auto it = translations.find(u.id);
    if (it == translations.end()) throw DataError("no translation for utterance '" + u.id + "'");
    const json& j = it->second;
    if (!j.contains("attention")) throw DataError("translation of '" + u.id + "' lacks attention weights");
    const auto tokens = j.at("tokens").get<Sentence>();
    if (tokens.empty()) {
      ++dropped;
      continue;
    }
    const auto rows = j.at("attention").get<std::vector<std::vector<double>>>();
    require(rows.size() == tokens.size(), "attention rows do not match tokens for '" + u.id + "'");
    std::vector<double> flat;
    for (const auto& r : rows) {
      require(r.size() == u.tokens.size(), "attention width does not match source length for '" + u.id + "'");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    const Tensor attention = Tensor::matrix(rows.size(), u.tokens.size(), std::move(flat));
    AnnotatedUtterance t = u;
    t.language = language;
    t.tokens = tokens;
    t.slots = project_slots(u.slots, attention, tokens.size());
    projected.push_back(std::move(t));
  }
  open_output(output) << serialize_corpus(projected);
  note("projected " + std::to_string(projected.size()) + " utterances, dropped " + std::to_string(dropped));
  return 0;
}

// ---- train-tagger --------------------------------------------------------

struct TaggerArgs {
  std::vector<std::string> train;
  std::string dev, provider = "zero", static_vectors, encoder, output, history;
  std::size_t zero_dim = 0, vocab_cap = 20000;
  TaggerConfig config;
};

int cmd_train_tagger(const TaggerArgs& a) {
  Corpus train;
  for (const std::string& path : a.train) {
    Corpus part = load_corpus(path);
    train.insert(train.end(), part.begin(), part.end());
  }
  require(!train.empty(), "training corpus is empty");
  const Corpus dev = a.dev.empty() ? Corpus{} : load_corpus(a.dev);
  const ProviderKind kind = parse_provider_kind(a.provider);
  const std::size_t dz = a.zero_dim ? a.zero_dim : default_zero_dim(kind);
  Vocabulary vocab = tagger_vocabulary(train, a.vocab_cap);
  std::shared_ptr<const EmbeddingProvider> provider;
  switch (kind) {
    case ProviderKind::zero:
      provider = std::make_shared<const EmbeddingProvider>(EmbeddingProvider::zero(std::move(vocab), dz));
      break;
    case ProviderKind::static_concat:
      require(!a.static_vectors.empty(), "--static-vectors is required for the static provider");
      provider = std::make_shared<const EmbeddingProvider>(EmbeddingProvider::with_static(
          std::move(vocab), dz, std::make_shared<const StaticVectors>(StaticVectors::load(a.static_vectors))));
      break;
    case ProviderKind::encoder_concat:
      require(!a.encoder.empty(), "--encoder is required for the encoder provider");
      provider = std::make_shared<const EmbeddingProvider>(EmbeddingProvider::with_encoder(
          std::move(vocab), dz, std::make_shared<const Seq2SeqModel>(Seq2SeqModel::load(a.encoder))));
      break;
  }
  auto result = train_tagger(train, dev, provider, a.config);
  result.model.save(a.output);
  if (!a.history.empty()) open_output(a.history) << result.history.to_json().dump(2) << '\n';
  return 0;
}

// ---- evaluate ------------------------------------------------------------

std::vector<Prediction> load_predictions(const std::string& path) {
  std::vector<Prediction> out;
  for (const AnnotatedUtterance& u : load_corpus(path)) out.push_back({u.id, u.domain, u.intent, u.slots});
  return out;
}

int cmd_evaluate(const std::string& model_path, const std::string& predictions_path, const std::string& test_path,
                 const std::string& output, const std::string& predictions_out) {
  require(model_path.empty() != predictions_path.empty(), "give exactly one of --model and --predictions");
  const Corpus test = load_corpus(test_path);
  std::vector<Prediction> predictions;
  if (!model_path.empty()) {
    const TaggerModel model = TaggerModel::load(model_path);
    predictions = predict_corpus(model, test);
  } else {
    predictions = load_predictions(predictions_path);
  }
  if (!predictions_out.empty()) {
    Corpus as_corpus;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      const Prediction& p = predictions[i];
      as_corpus.push_back({p.id, test[i].language, test[i].tokens, p.domain, p.intent, p.slots});
    }
    open_output(predictions_out) << serialize_corpus(as_corpus);
  }
  const std::string text = evaluate(test, predictions).to_json().dump(2);
  if (output.empty())
    std::cout << text << '\n';
  else
    open_output(output) << text << '\n';
  return 0;
}

// ---- learning-curve and run ----------------------------------------------

ExperimentConfig load_config(const std::string& path, const std::optional<std::uint64_t>& seed,
                             const std::string& output_dir) {
  json j = read_json_file(path);
  if (seed) j["seed"] = *seed;
  if (!output_dir.empty()) j["output_dir"] = output_dir;
  return ExperimentConfig::from_json(j);
}

int cmd_run(const std::string& config_path, const std::optional<std::uint64_t>& seed, const std::string& output_dir,
            bool force, std::size_t threads) {
  const ExperimentConfig config = load_config(config_path, seed, output_dir);
  const ExperimentReport report = run_experiment(config, force, note, threads);
  std::cout << json{{"output_dir", config.output_dir},
                    {"exact_match", report.exact_match.average},
                    {"shards", report.shards.size()}}
                   .dump()
            << '\n';
  return 0;
}

int cmd_learning_curve(const std::string& config_path, const std::optional<std::uint64_t>& seed,
                       const std::string& output_dir, std::vector<std::size_t> sizes, std::size_t repeats,
                       bool force, std::size_t threads) {
  ExperimentConfig base = load_config(config_path, seed, output_dir);
  require(!base.output_dir.empty(), "learning-curve needs an output directory");
  if (sizes.empty()) sizes.assign(std::begin(kLearningCurveSizes), std::end(kLearningCurveSizes));
  nlohmann::ordered_json curve = nlohmann::ordered_json::array();
  for (std::size_t n : sizes) {
    ExperimentConfig c = base;
    c.sample_size = n;
    c.repeats = repeats;
    c.output_dir = (fs::path(base.output_dir) / ("n" + std::to_string(n))).string();
    note("sample size " + std::to_string(n));
    const ExperimentReport r = run_experiment(c, force, note, threads);
    nlohmann::ordered_json point;
    point["sample_size"] = n;
    point["repeats"] = r.shards.size();
    point["exact_match_average"] = r.exact_match.average;
    point["exact_match_min"] = r.exact_match.minimum;
    point["exact_match_max"] = r.exact_match.maximum;
    point["report"] = (fs::path(c.output_dir).lexically_relative(base.output_dir) / "report.json").string();
    curve.push_back(std::move(point));
  }
  nlohmann::ordered_json doc;
  doc["strategy"] = to_string(base.strategy);
  doc["seed"] = base.seed;
  doc["points"] = std::move(curve);
  open_output((fs::path(base.output_dir) / "curve.json").string()) << doc.dump(2) << '\n';
  std::cout << doc.dump() << '\n';
  return 0;
}

// ---- errors --------------------------------------------------------------

int fail(const char* type, const std::string& message, int code) {
  std::cerr << json{{"error", {{"type", type}, {"message", message}}}}.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-lingual intent detection and slot filling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "xnlu 0.1.0");

  PrepareArgs prep;
  auto* prepare = app.add_subcommand("prepare", "Tokenize, preprocess or validate input data");
  prepare->add_option("-i,--input", prep.input, "Input file")->required()->check(CLI::ExistingFile);
  prepare->add_option("-o,--output", prep.output, "Output file (text format defaults to stdout)");
  prepare->add_option("--format", prep.format, "text | corpus | parallel")
      ->check(CLI::IsMember({"text", "corpus", "parallel"}));
  prepare->add_option("--language", prep.language, "Language code for tokenization");
  prepare->add_option("--lexicon", prep.lexicon, "Word list for dictionary segmentation");
  prepare->add_option("--schema", prep.schema, "Schema file used to validate a corpus");
  prepare->add_option("--max-tokens", prep.max_tokens, "Drop sentences longer than this");
  prepare->add_flag("--keep-case", prep.keep_case, "Do not lowercase");

  std::vector<std::string> align_inputs;
  std::size_t align_iterations = 5;
  std::string align_output;
  auto* align = app.add_subcommand("align", "Estimate an IBM Model 1 translation lexicon");
  align->add_option("-i,--input", align_inputs, "Parallel JSONL files (FILE or FILE@N)")->required();
  align->add_option("--iterations", align_iterations, "EM iterations");
  align->add_option("-o,--output", align_output, "Lexicon JSON")->required();

  Seq2SeqConfig s2s;
  std::string s2s_mode = "cove", s2s_output, s2s_log;
  std::vector<std::string> s2s_train, s2s_dev;
  bool s2s_no_expand = false;
  auto* train_encoder = app.add_subcommand("train-encoder", "Train a translation model whose encoder gives features");
  train_encoder->add_option("--train", s2s_train, "Parallel JSONL files (FILE or FILE@N)")->required();
  train_encoder->add_option("--dev", s2s_dev, "Parallel JSONL files for model selection")->required();
  train_encoder->add_option("--mode", s2s_mode, "cove | mult-cove | mult-cove-auto")
      ->check(CLI::IsMember({"cove", "mult-cove", "mult-cove-auto", "mult_cove", "mult_cove_auto"}));
  train_encoder->add_option("--source", s2s.source_language, "Source language");
  train_encoder->add_option("--pivot", s2s.pivot_language, "Pivot language");
  train_encoder->add_option("--embedding-dim", s2s.embedding_dim);
  train_encoder->add_option("--encoder-hidden", s2s.encoder_hidden, "Per direction");
  train_encoder->add_option("--encoder-layers", s2s.encoder_layers);
  train_encoder->add_option("--decoder-hidden", s2s.decoder_hidden);
  train_encoder->add_option("--decoder-layers", s2s.decoder_layers);
  train_encoder->add_option("--epochs", s2s.max_epochs);
  train_encoder->add_option("--lr", s2s.learning_rate);
  train_encoder->add_option("--batch-size", s2s.batch_size);
  train_encoder->add_option("--vocab-cap", s2s.vocab_cap);
  train_encoder->add_option("--candidates", s2s.candidate_limit, "Lexicon candidates per source token");
  train_encoder->add_option("--frequent", s2s.frequent_words, "Frequent words always in the output set");
  train_encoder->add_option("--align-iterations", s2s.alignment_iterations);
  train_encoder->add_option("--dropout", s2s.dropout);
  train_encoder->add_option("--clip", s2s.clip_norm);
  train_encoder->add_option("--seed", s2s.seed);
  train_encoder->add_flag("--no-expand", s2s_no_expand, "Train on the given tasks only");
  train_encoder->add_option("-o,--output", s2s_output, "Model checkpoint")->required();
  train_encoder->add_option("--log", s2s_log, "Per-epoch JSONL log");

  std::string enc_model, enc_input, enc_language = "en", enc_output;
  auto* encode = app.add_subcommand("encode", "Dump contextual vectors from a trained encoder");
  encode->add_option("-m,--model", enc_model)->required()->check(CLI::ExistingFile);
  encode->add_option("-i,--input", enc_input, "JSONL with tokens, or raw text lines")->required();
  encode->add_option("--language", enc_language, "Tokenization language for raw text");
  encode->add_option("-o,--output", enc_output)->required();

  std::string tr_model, tr_input, tr_task, tr_output;
  std::size_t tr_beam = 1;
  bool tr_attention = false;
  auto* translate = app.add_subcommand("translate", "Translate with beam search");
  translate->add_option("-m,--model", tr_model)->required()->check(CLI::ExistingFile);
  translate->add_option("-i,--input", tr_input, "JSONL with tokens, or raw text lines")->required();
  translate->add_option("--task", tr_task, "Task such as en->es")->required();
  translate->add_option("--beam", tr_beam);
  translate->add_flag("--emit-attention", tr_attention, "Include attention weights");
  translate->add_option("-o,--output", tr_output)->required();

  std::string pj_corpus, pj_translations, pj_language, pj_output;
  auto* project = app.add_subcommand("project", "Project slot spans through attention weights");
  project->add_option("--corpus", pj_corpus, "Annotated source corpus")->required();
  project->add_option("--translations", pj_translations, "Output of translate --emit-attention")->required();
  project->add_option("--language", pj_language, "Language of the translations")->required();
  project->add_option("-o,--output", pj_output)->required();

  TaggerArgs tg;
  auto* train_tagger_cmd = app.add_subcommand("train-tagger", "Train the domain classifier and joint models");
  train_tagger_cmd->add_option("--train", tg.train, "Training corpora")->required();
  train_tagger_cmd->add_option("--dev", tg.dev, "Selection corpus");
  train_tagger_cmd->add_option("--provider", tg.provider, "zero | static | encoder")
      ->check(CLI::IsMember({"zero", "static", "encoder"}));
  train_tagger_cmd->add_option("--static-vectors", tg.static_vectors, "Text vectors for the static provider");
  train_tagger_cmd->add_option("--encoder", tg.encoder, "Encoder checkpoint for the encoder provider");
  train_tagger_cmd->add_option("--zero-dim", tg.zero_dim, "Width of the trainable embedding");
  train_tagger_cmd->add_option("--vocab-cap", tg.vocab_cap);
  train_tagger_cmd->add_option("--epochs", tg.config.epochs);
  train_tagger_cmd->add_option("--lr", tg.config.learning_rate);
  train_tagger_cmd->add_option("--dropout", tg.config.dropout);
  train_tagger_cmd->add_option("--attention-dim", tg.config.attention_dim);
  train_tagger_cmd->add_option("--hidden", tg.config.hidden, "Per direction");
  train_tagger_cmd->add_option("--layers", tg.config.layers);
  train_tagger_cmd->add_option("--batch-size", tg.config.batch_size);
  train_tagger_cmd->add_option("--clip", tg.config.clip_norm);
  train_tagger_cmd->add_option("--seed", tg.config.seed);
  train_tagger_cmd->add_option("-o,--output", tg.output, "Model checkpoint")->required();
  train_tagger_cmd->add_option("--history", tg.history, "Training history JSON");

  std::string ev_model, ev_predictions, ev_test, ev_output, ev_predictions_out;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a tagger or a prediction file");
  evaluate_cmd->add_option("-m,--model", ev_model, "Tagger checkpoint");
  evaluate_cmd->add_option("--predictions", ev_predictions, "Predictions in corpus format");
  evaluate_cmd->add_option("--test", ev_test, "Gold corpus")->required();
  evaluate_cmd->add_option("-o,--output", ev_output, "Report JSON (default stdout)");
  evaluate_cmd->add_option("--write-predictions", ev_predictions_out, "Write model predictions");

  std::string run_config, run_output;
  std::optional<std::uint64_t> run_seed;
  bool run_force = false;
  std::size_t threads = default_threads();
  auto* run = app.add_subcommand("run", "Run a full experiment from a config file");
  run->add_option("-c,--config", run_config)->required()->check(CLI::ExistingFile);
  run->add_option("--seed", run_seed, "Override the config seed");
  run->add_option("--output-dir", run_output, "Override the output directory");
  run->add_flag("--force", run_force, "Replace results in a non-empty output directory");
  run->add_option("--threads", threads, "Shards trained in parallel (default XNLU_THREADS or 1)");

  std::string lc_config, lc_output;
  std::optional<std::uint64_t> lc_seed;
  std::vector<std::size_t> lc_sizes;
  std::size_t lc_repeats = 10;
  bool lc_force = false;
  auto* curve = app.add_subcommand("learning-curve", "Sweep target sample sizes with repeats");
  curve->add_option("-c,--config", lc_config)->required()->check(CLI::ExistingFile);
  curve->add_option("--seed", lc_seed, "Override the config seed");
  curve->add_option("--output-dir", lc_output, "Override the output directory");
  curve->add_option("--sizes", lc_sizes, "Per-domain sample sizes (default 10 50 100 200)")->delimiter(',');
  curve->add_option("--repeats", lc_repeats, "Samples per size");
  curve->add_flag("--force", lc_force, "Replace results in non-empty output directories");
  curve->add_option("--threads", threads, "Shards trained in parallel (default XNLU_THREADS or 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("usage", e.what(), 2);
  }

  try {
    if (*prepare) return cmd_prepare(prep);
    if (*align) return cmd_align(align_inputs, align_iterations, align_output);
    if (*train_encoder) {
      s2s.mode = parse_encoder_mode(s2s_mode);
      return cmd_train_encoder(s2s_train, s2s_dev, s2s, !s2s_no_expand, s2s_output, s2s_log);
    }
    if (*encode) return cmd_encode(enc_model, enc_input, enc_language, enc_output);
    if (*translate) return cmd_translate(tr_model, tr_input, tr_task, tr_beam, tr_attention, tr_output);
    if (*project) return cmd_project(pj_corpus, pj_translations, pj_language, pj_output);
    if (*train_tagger_cmd) return cmd_train_tagger(tg);
    if (*evaluate_cmd) return cmd_evaluate(ev_model, ev_predictions, ev_test, ev_output, ev_predictions_out);
    if (*run) return cmd_run(run_config, run_seed, run_output, run_force, threads);
    if (*curve) return cmd_learning_curve(lc_config, lc_seed, lc_output, lc_sizes, lc_repeats, lc_force, threads);
  } catch (const PreconditionError& e) {
    return fail("precondition", e.what(), 2);
  } catch (const DataError& e) {
    return fail("data", e.what(), 2);
  } catch (const NumericError& e) {
    return fail("numeric", e.what(), 3);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return 1;
}
