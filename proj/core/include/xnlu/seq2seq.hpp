#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xnlu/layers.hpp"
#include "xnlu/lexicon.hpp"
#include "xnlu/vocab.hpp"

namespace xnlu {

enum class EncoderMode { cove, mult_cove, mult_cove_auto };

std::string to_string(EncoderMode mode);
/// Accepts "cove", "mult_cove", "mult_cove_auto" and the dashed spellings.
EncoderMode parse_encoder_mode(const std::string& text);

/// Translation direction; source == target is an autoencoding task.
struct Task {
  std::string source;
  std::string target;

  bool is_translation() const { return source != target; }
  /// "es->en"
  std::string tag() const { return source + "->" + target; }
  static Task parse(const std::string& tag);
  friend auto operator<=>(const Task&, const Task&) = default;
};

struct ParallelPair {
  Sentence source;
  Sentence target;
  Task task;
  friend bool operator==(const ParallelPair&, const ParallelPair&) = default;
};

/// JSONL, one {"source_tokens": [...], "target_tokens": [...], "task": "es->en"} per line.
std::vector<ParallelPair> parse_parallel(std::istream& in, const std::string& source_name);
std::vector<ParallelPair> load_parallel(const std::string& path, std::size_t repeat = 1);
void save_parallel(const std::string& path, std::span<const ParallelPair> pairs);

/// cove: {src->pivot}; mult_cove: adds pivot->src; mult_cove_auto: adds
/// src->src and pivot->pivot.
std::vector<Task> mode_tasks(EncoderMode mode, const std::string& source_language,
                             const std::string& pivot_language = "en");

/// Expands src->pivot pairs into every task of `mode`: reversed pairs for
/// the multilingual modes, plus autoencoding copies of both sides.
std::vector<ParallelPair> expand_tasks(std::span<const ParallelPair> pairs, EncoderMode mode);

struct Seq2SeqConfig {
  std::size_t embedding_dim = 300;
  std::size_t encoder_hidden = 512;  // per direction
  std::size_t encoder_layers = 2;
  std::size_t decoder_layers = 2;
  std::size_t decoder_hidden = 512;
  EncoderMode mode = EncoderMode::cove;
  std::string source_language = "es";
  std::string pivot_language = "en";
  std::size_t candidate_limit = 30;
  std::size_t frequent_words = 2000;
  std::size_t max_epochs = 100;
  double learning_rate = 0.5;
  std::size_t batch_size = 32;
  std::size_t vocab_cap = 20000;
  std::size_t alignment_iterations = 5;
  double dropout = 0.0;
  double clip_norm = 5.0;
  std::uint64_t seed = 0;

  void validate() const;
  std::vector<Task> tasks() const { return mode_tasks(mode, source_language, pivot_language); }
  nlohmann::json to_json() const;
  static Seq2SeqConfig from_json(const nlohmann::json& j);
  friend bool operator==(const Seq2SeqConfig&, const Seq2SeqConfig&) = default;
};

/// Two-layer biLSTM encoder and an attentional LSTM decoder with input
/// feeding. The decoder's first input is the control token of the task's
/// target language.
struct Seq2SeqModel {
  Seq2SeqConfig config;
  Vocabulary vocab;
  Parameter source_embedding;  // [V x E]
  Parameter target_embedding;  // [V x E]
  BiLstmStack encoder;
  std::vector<LstmParams> decoder;
  Parameter attention_keys;   // [Hd x 2He], projects encoder states into decoder space
  Parameter combine_weights;  // [Hd x (2He + Hd)]
  Parameter combine_bias;     // [Hd]
  Parameter output_weights;   // [V x Hd]
  Parameter output_bias;      // [V]

  static Seq2SeqModel create(const Seq2SeqConfig& config, Vocabulary vocab, Rng& rng);

  ParameterList parameters();
  std::size_t encoder_output_dim() const { return encoder.output_dim(); }
  bool supports(const Task& task) const;

  nlohmann::json to_json() const;
  static Seq2SeqModel from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static Seq2SeqModel load(const std::string& path);
};

struct EpochLog {
  std::size_t epoch = 0;
  double learning_rate = 0.0;  // rate used during the epoch
  double train_loss = 0.0;     // mean restricted-softmax NLL per target token
  std::map<std::string, double> dev_perplexity;  // by task tag
  double selection_perplexity = 0.0;  // mean over translation tasks
  bool decayed = false;
};

struct Seq2SeqTrainingResult {
  Seq2SeqModel model;  // parameters of the selected epoch
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  LexiconTable lexicon;
};

/// Teacher-forced SGD over shuffled batches with the alignment-restricted
/// training softmax. After each epoch the learning rate is decayed by 1%
/// when the mean translation-task dev perplexity regresses; the epoch with
/// the lowest such perplexity is returned.
Seq2SeqTrainingResult train_seq2seq(std::span<const ParallelPair> train, std::span<const ParallelPair> dev,
                                    const Seq2SeqConfig& config,
                                    const std::function<void(const EpochLog&)>& on_epoch = {});

/// Vocabulary of a training set: union of the per-language top lists.
Vocabulary seq2seq_vocabulary(std::span<const ParallelPair> train, const Seq2SeqConfig& config);

/// Total natural-log NLL and token count (EOS included) under the full softmax.
struct NllTotals {
  double nll = 0.0;
  std::size_t tokens = 0;
};
NllTotals sequence_nll(const Seq2SeqModel& model, const ParallelPair& pair);

/// exp(total NLL / total tokens) over pairs that all carry `task`.
double perplexity(const Seq2SeqModel& model, std::span<const ParallelPair> pairs, const Task& task);

/// Per-task perplexities of a mixed set, keyed by task tag.
std::map<std::string, double> perplexity_by_task(const Seq2SeqModel& model, std::span<const ParallelPair> pairs);

/// Teacher-forced training loss of one pair restricted to `candidates`
/// (which must contain every gold id), as a graph node.
Var restricted_sequence_loss(Graph& g, const Seq2SeqModel& model, const ParallelPair& pair,
                             std::span<const std::size_t> candidates, bool train_mode, Rng* dropout_rng);

/// Restricted and full log-normalizers at every teacher-forced decoder step.
struct NormalizerPair {
  double restricted = 0.0;
  double full = 0.0;
};
std::vector<NormalizerPair> log_normalizers(const Seq2SeqModel& model, const ParallelPair& pair,
                                            std::span<const std::size_t> candidates);

/// Top-layer encoder states [T x 2He] with dropout off.
Tensor encode_contextual(const Seq2SeqModel& model, std::span<const std::string> tokens);

struct Translation {
  std::vector<std::string> tokens;
  Tensor attention;  // [T_out x T_src], one row per emitted token (EOS excluded)
  double score = 0.0;  // sum of token log-probabilities, EOS included
};

/// Beam search (beam 1 is greedy) capped at 2 * T_src + 5 output tokens.
Translation translate_with_attention(const Seq2SeqModel& model, std::span<const std::string> tokens,
                                     const Task& task, std::size_t beam = 1);

/// Model log-probability of emitting `output` (followed by EOS) for `tokens`.
double sequence_score(const Seq2SeqModel& model, std::span<const std::string> tokens,
                      std::span<const std::string> output, const Task& task);

}  // namespace xnlu
