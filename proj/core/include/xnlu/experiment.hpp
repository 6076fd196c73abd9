#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xnlu/eval.hpp"
#include "xnlu/tagger.hpp"
#include "xnlu/transfer.hpp"

namespace xnlu {

/// Everything one experiment needs. Empty paths mean "not provided".
struct ExperimentConfig {
  Strategy strategy = Strategy::target_only;
  std::uint64_t seed = 0;
  std::string output_dir;
  std::string high_language = "en";
  std::string target_language = "es";

  struct Data {
    std::string high_train, high_dev, target_train, target_dev, target_test, schema;
    friend bool operator==(const Data&, const Data&) = default;
  } data;

  struct Provider {
    ProviderKind kind = ProviderKind::zero;
    std::string static_vectors;
    std::string encoder;
    std::size_t zero_dim = 0;  // 0 = default for the kind
    friend bool operator==(const Provider&, const Provider&) = default;
  } provider;

  struct Translation {
    std::string model;
    std::size_t beam = 1;
    friend bool operator==(const Translation&, const Translation&) = default;
  } translation;

  TaggerConfig tagger;
  std::optional<std::size_t> sample_size;  // per domain; empty = all target data
  std::size_t repeats = 1;
  std::size_t vocab_cap = 20000;

  /// Checks field values and that every file the strategy reads exists.
  void validate() const;
  TransferPlan plan() const;
  /// Fully resolved (every default written out).
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::string& path);
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

struct RunShard {
  std::size_t repeat = 0;
  std::uint64_t seed = 0;
  std::size_t train_utterances = 0;
  std::size_t selection_utterances = 0;
  MetricReport metrics;
  TaggerHistory history;
};

struct ExperimentReport {
  nlohmann::ordered_json metadata;
  MetricReport metrics;  // rates averaged over shards, counts summed
  RepeatSummary exact_match;
  std::vector<RunShard> shards;
  std::size_t translation_dropped = 0;

  nlohmann::ordered_json to_json() const;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Runs the strategy end to end and writes report.json, manifest.json and
/// one tagger checkpoint per shard (model.json, or model-<i>.json when
/// repeated) into config.output_dir, which must be empty unless `force`.
/// Up to `threads` shards train concurrently; results do not depend on it.
ExperimentReport run_experiment(const ExperimentConfig& config, bool force = false, const ProgressFn& progress = {},
                                std::size_t threads = 1);

/// Averages rates and sums counts.
MetricReport average_reports(const std::vector<MetricReport>& reports);

}  // namespace xnlu
