#include "xnlu/vocab.hpp"

#include <algorithm>

#include "xnlu/error.hpp"

namespace xnlu {

Vocabulary::Vocabulary(const std::vector<std::string>& control_languages) {
  for (const char* t : {"<pad>", "<unk>", "<s>", "</s>"}) add(t);
  for (const std::string& lang : control_languages) {
    const std::string tok = control_token(lang);
    require(!contains(tok), "control language '" + lang + "' listed twice");
    add(tok);
  }
  reserved_ = tokens_.size();
}

std::size_t Vocabulary::add(const std::string& token) {
  if (auto it = index_.find(token); it != index_.end()) return it->second;
  index_.emplace(token, tokens_.size());
  tokens_.push_back(token);
  return tokens_.size() - 1;
}

std::size_t Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

std::size_t Vocabulary::control_id(const std::string& language) const {
  auto it = index_.find(control_token(language));
  require(it != index_.end(), "vocabulary has no control token for language '" + language + "'");
  return it->second;
}

std::vector<std::size_t> Vocabulary::encode(std::span<const std::string> tokens) const {
  std::vector<std::size_t> ids;
  ids.reserve(tokens.size());
  for (const std::string& t : tokens) ids.push_back(id(t));
  return ids;
}

nlohmann::json Vocabulary::to_json() const { return {{"tokens", tokens_}, {"reserved", reserved_}}; }

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  Vocabulary v;
  v.tokens_.clear();
  v.index_.clear();
  for (const auto& t : j.at("tokens")) {
    const std::string tok = t.get<std::string>();
    if (v.index_.contains(tok)) throw DataError("vocabulary lists '" + tok + "' twice");
    v.index_.emplace(tok, v.tokens_.size());
    v.tokens_.push_back(tok);
  }
  v.reserved_ = j.at("reserved").get<std::size_t>();
  if (v.reserved_ < 4 || v.reserved_ > v.tokens_.size() || v.tokens_[kUnk] != "<unk>" || v.tokens_[kEos] != "</s>")
    throw DataError("vocabulary reserved block is malformed");
  return v;
}

std::vector<std::pair<std::string, std::size_t>> token_frequencies(std::span<const Sentence> corpus) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const Sentence& s : corpus)
    for (const std::string& t : s) ++counts[t];
  std::vector<std::pair<std::string, std::size_t>> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  return sorted;
}

namespace {

void add_top(Vocabulary& v, std::span<const Sentence> corpus, std::size_t cap) {
  std::size_t kept = 0;
  for (const auto& [tok, count] : token_frequencies(corpus)) {
    if (kept == cap) break;
    if (v.contains(tok) && v.is_reserved(v.id(tok))) continue;
    v.add(tok);
    ++kept;
  }
}

}  // namespace

Vocabulary build_vocab(std::span<const Sentence> corpus, std::size_t cap,
                       const std::vector<std::string>& control_languages) {
  require(cap >= 1, "vocabulary cap must be at least 1");
  require(!corpus.empty(), "cannot build a vocabulary from an empty corpus");
  Vocabulary v(control_languages);
  add_top(v, corpus, cap);
  return v;
}

Vocabulary build_union_vocab(std::span<const std::vector<Sentence>> per_language, std::size_t cap,
                             const std::vector<std::string>& control_languages) {
  require(cap >= 1, "vocabulary cap must be at least 1");
  bool any = false;
  for (const auto& c : per_language) any = any || !c.empty();
  require(any, "cannot build a vocabulary from an empty corpus");
  Vocabulary v(control_languages);
  for (const auto& corpus : per_language) add_top(v, corpus, cap);
  return v;
}

}  // namespace xnlu
