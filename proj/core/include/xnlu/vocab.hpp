#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace xnlu {

using Sentence = std::vector<std::string>;

/// Dense token <-> id map. Ids 0..3 are <pad>, <unk>, <s>, </s>; language
/// control tokens ("<2en>", ...) follow; corpus tokens come after.
class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;
  static constexpr std::size_t kBos = 2;
  static constexpr std::size_t kEos = 3;

  explicit Vocabulary(const std::vector<std::string>& control_languages = {});

  static std::string control_token(const std::string& language) { return "<2" + language + ">"; }

  /// Adds a token if absent; returns its id.
  std::size_t add(const std::string& token);
  /// Id of the token, or kUnk when absent.
  std::size_t id(const std::string& token) const;
  bool contains(const std::string& token) const { return index_.contains(token); }
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  std::size_t size() const noexcept { return tokens_.size(); }
  std::size_t reserved_count() const noexcept { return reserved_; }
  bool is_reserved(std::size_t id) const noexcept { return id < reserved_; }
  std::size_t control_id(const std::string& language) const;
  bool has_control(const std::string& language) const { return contains(control_token(language)); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  std::vector<std::size_t> encode(std::span<const std::string> tokens) const;

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ && a.reserved_ == b.reserved_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t reserved_ = 0;
};

/// The `cap` most frequent tokens (ties broken lexicographically) ordered by
/// descending frequency, after the reserved block.
Vocabulary build_vocab(std::span<const Sentence> corpus, std::size_t cap,
                       const std::vector<std::string>& control_languages = {});

/// Union of per-language top-`cap` lists, in the order the languages are given.
Vocabulary build_union_vocab(std::span<const std::vector<Sentence>> per_language, std::size_t cap,
                             const std::vector<std::string>& control_languages = {});

/// Tokens sorted by descending frequency (ties lexicographic).
std::vector<std::pair<std::string, std::size_t>> token_frequencies(std::span<const Sentence> corpus);

}  // namespace xnlu
