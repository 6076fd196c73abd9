#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xnlu/corpus.hpp"
#include "xnlu/embedding.hpp"
#include "xnlu/seq2seq.hpp"

namespace xnlu {

enum class Strategy { target_only, translate_train, cross_lingual, zero_shot };

std::string to_string(Strategy s);
/// Accepts underscore and dash spellings.
Strategy parse_strategy(const std::string& text);

/// Per-domain sample sizes of the learning-curve protocol.
inline constexpr std::size_t kLearningCurveSizes[] = {10, 50, 100, 200};

struct TransferPlan {
  Strategy strategy = Strategy::target_only;
  ProviderKind provider = ProviderKind::zero;
  std::optional<std::size_t> sample_size;  // per domain; empty = all target data
  std::size_t repeats = 1;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static TransferPlan from_json(const nlohmann::json& j);
  friend bool operator==(const TransferPlan&, const TransferPlan&) = default;
};

/// Each target token takes the slot label covering the source position its
/// attention row peaks at (lowest index on ties); maximal runs of one label
/// become spans.
std::vector<SlotSpan> project_slots(std::span<const SlotSpan> source_spans, const Tensor& attention,
                                    std::size_t target_length);

struct TranslatedCorpus {
  Corpus corpus;
  std::size_t dropped = 0;  // utterances whose translation came out empty
};

/// Translates every utterance with `task`, copies domain and intent, and
/// projects slots through the attention rows. Output utterances are tagged
/// with the task's target language.
TranslatedCorpus make_translate_train_corpus(const Corpus& corpus, const Seq2SeqModel& model, const Task& task,
                                             std::size_t beam = 1);

/// The low corpus repeated ceil(|high| / |low|) times, appended to the high
/// corpus, then shuffled by `seed`. Under zero_shot the result is exactly
/// `high` and `low` must be empty.
Corpus mix_and_upsample(const Corpus& high, const Corpus& low, std::uint64_t seed,
                        Strategy strategy = Strategy::cross_lingual);

struct LearningCurveSplit {
  Corpus train;
  Corpus selection;
};

/// Per repeat i (seeded with seed + i): disjoint train and selection
/// samples of n utterances per domain, drawn without replacement.
std::vector<LearningCurveSplit> sample_learning_curve_splits(const Corpus& target, std::size_t n,
                                                             std::size_t repeats, std::uint64_t seed);

}  // namespace xnlu
