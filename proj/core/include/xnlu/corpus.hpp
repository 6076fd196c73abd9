#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "xnlu/tensor.hpp"

namespace xnlu {

/// Labeled token range [start, end).
struct SlotSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string label;

  friend bool operator==(const SlotSpan&, const SlotSpan&) = default;
};

struct AnnotatedUtterance {
  std::string id;
  std::string language;
  std::vector<std::string> tokens;
  std::string domain;
  std::string intent;
  std::vector<SlotSpan> slots;

  friend bool operator==(const AnnotatedUtterance&, const AnnotatedUtterance&) = default;
};

using Corpus = std::vector<AnnotatedUtterance>;

/// Throws PreconditionError unless spans are in range, sorted by start and
/// non-overlapping for an utterance of `length` tokens.
void validate_spans(std::span<const SlotSpan> spans, std::size_t length);
bool spans_valid(std::span<const SlotSpan> spans, std::size_t length) noexcept;

struct DomainSchema {
  std::string name;
  std::vector<std::string> intents;
  std::vector<std::string> slot_types;
};

/// Declared label inventory. On disk:
///   {"domains": [{"name": ..., "intents": [...], "slots": [...]}, ...]}
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<DomainSchema> domains);

  /// Sorted inventory of everything that occurs in the given corpora.
  static Schema infer(std::span<const Corpus* const> corpora);
  static Schema infer(const Corpus& corpus);
  static Schema load(const std::string& path);
  static Schema from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  const std::vector<DomainSchema>& domains() const noexcept { return domains_; }
  const DomainSchema* find(const std::string& domain) const;
  std::optional<std::size_t> domain_index(const std::string& domain) const;
  std::size_t total_intents() const;
  std::size_t distinct_slot_types() const;

  /// Empty string when the utterance conforms, otherwise the reason.
  std::string check(const AnnotatedUtterance& u) const;

  friend bool operator==(const Schema& a, const Schema& b);

 private:
  std::vector<DomainSchema> domains_;
};

nlohmann::ordered_json utterance_to_json(const AnnotatedUtterance& u);
AnnotatedUtterance utterance_from_json(const nlohmann::json& j);

/// One JSON object per line: id, language, domain, intent, tokens, slots.
/// Blank lines are ignored. Every error names "<path>:<line>".
Corpus load_corpus(const std::string& path, const Schema* schema = nullptr);
Corpus parse_corpus(std::istream& in, const std::string& source_name, const Schema* schema = nullptr);
void save_corpus(const std::string& path, const Corpus& corpus);
std::string serialize_corpus(const Corpus& corpus);

/// Lowercases, removes exact duplicate token sequences (first occurrence
/// wins) and drops sequences longer than `max_tokens`. Order is preserved.
std::vector<std::vector<std::string>> preprocess_corpus(const std::vector<std::vector<std::string>>& sentences,
                                                        std::size_t max_tokens = 100);

/// Per-domain utterance counts, in schema order when a schema is given.
std::vector<std::pair<std::string, std::size_t>> count_by_domain(const Corpus& corpus);

/// Fixed pretrained vectors from a text file: optional "<count> <dim>"
/// header, then "<token> <dim floats>" per line.
class StaticVectors {
 public:
  StaticVectors() = default;
  StaticVectors(std::vector<std::string> tokens, Tensor table);
  static StaticVectors load(const std::string& path);

  std::size_t dim() const { return table_.empty() ? 0 : table_.cols(); }
  std::size_t size() const noexcept { return tokens_.size(); }
  /// Row index of the token, if present.
  std::optional<std::size_t> find(const std::string& token) const;
  std::span<const double> vector(std::size_t row) const { return table_.row(row); }
  const Tensor& table() const noexcept { return table_; }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  Tensor table_;
};

}  // namespace xnlu
