#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xnlu/vocab.hpp"

namespace xnlu {

struct SentencePair {
  Sentence source;
  Sentence target;
};

struct LexiconEntry {
  std::string target;
  double probability = 0.0;
  friend bool operator==(const LexiconEntry&, const LexiconEntry&) = default;
};

/// t(target | source) for every source token; each row sums to 1 and is
/// sorted by descending probability (ties by target token).
class LexiconTable {
 public:
  LexiconTable() = default;
  explicit LexiconTable(std::map<std::string, std::vector<LexiconEntry>> rows);

  std::span<const LexiconEntry> entries(const std::string& source) const;
  double probability(const std::string& source, const std::string& target) const;
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }
  const std::map<std::string, std::vector<LexiconEntry>>& rows() const noexcept { return rows_; }

  nlohmann::json to_json() const;
  static LexiconTable from_json(const nlohmann::json& j);

  friend bool operator==(const LexiconTable&, const LexiconTable&) = default;

 private:
  std::map<std::string, std::vector<LexiconEntry>> rows_;
};

/// IBM Model 1 estimated by EM from a uniform start over co-occurring pairs.
LexiconTable ibm1_lexicon(std::span<const SentencePair> pairs, std::size_t iterations);

/// Target ids allowed by the training softmax for one batch: the `limit`
/// most probable lexicon targets of each source token, the `frequent`
/// ids, and every reserved id (EOS included). Sorted, without duplicates.
std::vector<std::size_t> build_output_candidates(std::span<const std::string> source_tokens,
                                                 const LexiconTable& lexicon,
                                                 std::span<const std::size_t> frequent, const Vocabulary& vocab,
                                                 std::size_t limit = 30);

}  // namespace xnlu
