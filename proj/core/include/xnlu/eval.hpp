#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xnlu/corpus.hpp"

namespace xnlu {

struct Prediction {
  std::string id;
  std::string domain;
  std::string intent;
  std::vector<SlotSpan> slots;
  friend bool operator==(const Prediction&, const Prediction&) = default;
};

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Spans matching a distinct gold span on start, end and label.
std::size_t count_true_positives(std::span<const SlotSpan> gold, std::span<const SlotSpan> predicted);

/// Span-level precision, recall and harmonic-mean F1. Two empty sets score
/// 1/1/1; an empty side otherwise contributes 0.
PrecisionRecall slot_prf(std::span<const SlotSpan> gold, std::span<const SlotSpan> predicted);

/// Domain, intent and the full span set all equal.
bool exact_match(const AnnotatedUtterance& gold, const Prediction& predicted);

/// Fraction of exact matches; predictions are paired with gold by id.
double exact_match_rate(const Corpus& gold, std::span<const Prediction> predictions);

/// Raw counts for one slice of the evaluation data.
struct MetricCounts {
  std::size_t utterances = 0;
  std::size_t domain_correct = 0;
  std::size_t intent_correct = 0;
  std::size_t exact_matches = 0;
  std::size_t gold_spans = 0;
  std::size_t predicted_spans = 0;
  std::size_t true_positive_spans = 0;

  MetricCounts& operator+=(const MetricCounts& other);
  friend bool operator==(const MetricCounts&, const MetricCounts&) = default;
};

struct MetricReport {
  double exact_match = 0.0;
  double domain_accuracy = 0.0;
  double intent_accuracy = 0.0;
  double slot_precision = 0.0;
  double slot_recall = 0.0;
  double slot_f1 = 0.0;
  MetricCounts counts;
  /// Set when some rate had a zero denominator and was reported as 0.
  bool undefined_rates = false;

  nlohmann::ordered_json to_json() const;
};

/// Per-domain counts (gold domain), in first-appearance order.
std::vector<std::pair<std::string, MetricCounts>> count_by_gold_domain(const Corpus& gold,
                                                                       std::span<const Prediction> predictions);

/// Pools raw counts across slices before computing any rate.
MetricReport micro_average(std::span<const MetricCounts> per_domain);

/// count_by_gold_domain followed by micro_average.
MetricReport evaluate(const Corpus& gold, std::span<const Prediction> predictions);

/// Mean, minimum and maximum of one metric over repeated runs.
struct RepeatSummary {
  double average = 0.0;
  double minimum = 0.0;
  double maximum = 0.0;
};
RepeatSummary summarize(std::span<const double> values);

/// git-style object id: SHA-1 of "blob <size>\0" followed by the content.
std::string git_blob_hash(const std::string& content);

}  // namespace xnlu
