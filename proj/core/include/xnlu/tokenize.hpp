#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace xnlu {

/// Word list for dictionary tokenization (one entry per line on disk).
class WordLexicon {
 public:
  WordLexicon() = default;
  explicit WordLexicon(const std::vector<std::string>& words);
  static WordLexicon load(const std::string& path);

  bool contains(std::string_view word) const { return words_.contains(std::string(word)); }
  std::size_t size() const noexcept { return words_.size(); }
  bool empty() const noexcept { return words_.empty(); }
  std::size_t max_code_points() const noexcept { return max_code_points_; }

 private:
  std::unordered_set<std::string> words_;
  std::size_t max_code_points_ = 0;
};

struct TokenizerOptions {
  bool lowercase = true;
  const WordLexicon* lexicon = nullptr;  // required for "th"
};

/// Rule-based tokenization for whitespace languages (en, es, ...): split on
/// whitespace, then split punctuation off as separate tokens. A connector
/// (. , : ' - and the right single quote) between two alphanumerics stays
/// inside the word ("7.30", "don't"). For "th", punctuation-free runs are
/// segmented by greedy longest match against the lexicon; characters not
/// covered by any entry become single-character tokens.
std::vector<std::string> tokenize(std::string_view text, std::string_view language,
                                  const TokenizerOptions& options = {});

/// Lowercases ASCII and the Latin-1, Latin Extended-A, Greek and Cyrillic
/// capital ranges; other code points pass through.
std::string utf8_lowercase(std::string_view text);

/// Splits UTF-8 text into code points (each as its own string). Invalid
/// bytes are passed through one at a time.
std::vector<std::string> utf8_code_points(std::string_view text);

}  // namespace xnlu
