#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "xnlu/corpus.hpp"
#include "xnlu/random.hpp"
#include "xnlu/seq2seq.hpp"

namespace xnlu {

/// Shape of a generated intent/slot grammar.
struct SyntheticConfig {
  std::size_t domains = 2;
  std::size_t intents_per_domain = 3;
  std::size_t slot_types_per_domain = 2;
  std::size_t values_per_slot = 6;
  std::size_t max_value_length = 2;
  std::size_t templates_per_intent = 3;
  std::size_t filler_words = 8;
  /// When set, slot positions in templates are shared by every slot type of
  /// the domain, so only the value identifies the type.
  bool shared_slot_contexts = false;
  std::uint64_t seed = 0;
};

struct SyntheticGrammar {
  struct Piece {
    std::string word;           // literal word, or empty for a slot position
    std::size_t slot_type = 0;  // slot type index when `word` is empty
  };
  struct Intent {
    std::string name;
    std::vector<std::vector<Piece>> templates;
  };
  struct SlotType {
    std::string name;
    std::vector<std::vector<std::string>> values;
  };
  struct Domain {
    std::string name;
    std::vector<Intent> intents;
    std::vector<SlotType> slots;
  };

  SyntheticConfig config;
  std::vector<Domain> domains;

  Schema schema() const;
  /// Every word the grammar can emit.
  std::vector<std::string> words() const;
};

SyntheticGrammar make_grammar(const SyntheticConfig& config);

/// `n` utterances with uniformly drawn domain, intent, template and values.
Corpus generate_corpus(const SyntheticGrammar& grammar, std::size_t n, Rng& rng, const std::string& id_prefix,
                       const std::string& language = "en");

/// One-to-one word substitution into an invented language.
struct WordMapping {
  std::string language;
  std::map<std::string, std::string> words;

  std::string map(const std::string& word) const;
};

WordMapping make_word_mapping(const std::vector<std::string>& words, const std::string& language, std::uint64_t seed);

/// Token-by-token substitution; spans, domain and intent carry over.
Corpus translate_corpus(const Corpus& corpus, const WordMapping& mapping);

/// Distinct pronounceable words, deterministic in the seed.
std::vector<std::string> invented_words(std::size_t count, std::uint64_t seed, const std::string& prefix = "");

/// Random sentences over `vocab_size` invented words (length 1..max_length)
/// paired with their word-by-word substitution, tagged source->target.
std::vector<ParallelPair> substitution_parallel(std::size_t vocab_size, std::size_t pairs, std::size_t max_length,
                                                const std::string& source, const std::string& target,
                                                std::uint64_t seed);

}  // namespace xnlu
