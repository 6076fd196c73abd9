#include "xnlu/synthetic.hpp"

#include <set>

#include "xnlu/error.hpp"

namespace xnlu {

std::vector<std::string> invented_words(std::size_t count, std::uint64_t seed, const std::string& prefix) {
  static const char* const kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"};
  static const char* const kVowels[] = {"a", "e", "i", "o", "u"};
  Rng rng(seed, "words");
  std::set<std::string> seen;
  std::vector<std::string> out;
  while (out.size() < count) {
    std::string w = prefix;
    const std::size_t syllables = 2 + rng.index(2);
    for (std::size_t s = 0; s < syllables; ++s) {
      w += kOnsets[rng.index(std::size(kOnsets))];
      w += kVowels[rng.index(std::size(kVowels))];
    }
    if (seen.insert(w).second) out.push_back(w);
  }
  return out;
}

SyntheticGrammar make_grammar(const SyntheticConfig& c) {
  require(c.domains >= 1 && c.intents_per_domain >= 1 && c.slot_types_per_domain >= 1,
          "synthetic grammar needs at least one domain, intent and slot type");
  require(c.values_per_slot >= 1 && c.max_value_length >= 1 && c.templates_per_intent >= 1,
          "synthetic grammar needs values and templates");
  Rng rng(c.seed, "grammar");
  const std::size_t intents = c.domains * c.intents_per_domain;
  const std::size_t slot_types = c.domains * c.slot_types_per_domain;
  // Keywords per intent, context words per slot type (or per domain), a
  // shared filler pool and value words.
  const std::size_t value_words = slot_types * c.values_per_slot * c.max_value_length;
  auto pool = invented_words(2 * intents + slot_types + c.domains + c.filler_words + value_words, c.seed);
  std::size_t next = 0;
  auto take = [&] { return pool[next++]; };

  std::vector<std::string> fillers;
  SyntheticGrammar g;
  g.config = c;
  for (std::size_t d = 0; d < c.domains; ++d) {
    SyntheticGrammar::Domain dom;
    dom.name = "domain" + std::to_string(d);
    const std::string shared_context = take();
    std::vector<std::string> contexts;
    for (std::size_t s = 0; s < c.slot_types_per_domain; ++s) {
      SyntheticGrammar::SlotType st;
      st.name = dom.name + "_slot" + std::to_string(s);
      contexts.push_back(c.shared_slot_contexts ? shared_context : take());
      dom.slots.push_back(std::move(st));
    }
    for (std::size_t i = 0; i < c.intents_per_domain; ++i) {
      SyntheticGrammar::Intent in;
      in.name = dom.name + "_intent" + std::to_string(i);
      const std::string keywords[] = {take(), take()};
      for (std::size_t t = 0; t < c.templates_per_intent; ++t) {
        std::vector<SyntheticGrammar::Piece> tmpl;
        tmpl.push_back({keywords[t % 2], 0});
        // One or two slot positions, each behind its context word.
        const std::size_t positions = 1 + rng.index(2);
        for (std::size_t p = 0; p < positions; ++p) {
          const std::size_t type = rng.index(c.slot_types_per_domain);
          tmpl.push_back({contexts[type], 0});
          tmpl.push_back({"", type});
        }
        if (t % 2 == 1) std::swap(tmpl[0], tmpl[tmpl.size() - 2]);
        in.templates.push_back(std::move(tmpl));
      }
      dom.intents.push_back(std::move(in));
    }
    g.domains.push_back(std::move(dom));
  }
  for (std::size_t f = 0; f < c.filler_words; ++f) fillers.push_back(take());
  for (auto& dom : g.domains) {
    for (auto& st : dom.slots) {
      for (std::size_t v = 0; v < c.values_per_slot; ++v) {
        std::vector<std::string> value;
        const std::size_t len = 1 + rng.index(c.max_value_length);
        for (std::size_t k = 0; k < len; ++k) value.push_back(take());
        st.values.push_back(std::move(value));
      }
    }
    // Scatter filler words into the templates so lengths vary.
    for (auto& in : dom.intents)
      for (auto& tmpl : in.templates)
        if (!fillers.empty() && rng.index(2) == 0) tmpl.insert(tmpl.begin(), {fillers[rng.index(fillers.size())], 0});
  }
  return g;
}

Schema SyntheticGrammar::schema() const {
  std::vector<DomainSchema> out;
  for (const Domain& d : domains) {
    DomainSchema ds;
    ds.name = d.name;
    for (const Intent& i : d.intents) ds.intents.push_back(i.name);
    for (const SlotType& s : d.slots) ds.slot_types.push_back(s.name);
    out.push_back(std::move(ds));
  }
  return Schema(std::move(out));
}

std::vector<std::string> SyntheticGrammar::words() const {
  std::set<std::string> all;
  for (const Domain& d : domains) {
    for (const Intent& i : d.intents)
      for (const auto& t : i.templates)
        for (const Piece& p : t)
          if (!p.word.empty()) all.insert(p.word);
    for (const SlotType& s : d.slots)
      for (const auto& v : s.values) all.insert(v.begin(), v.end());
  }
  return {all.begin(), all.end()};
}

Corpus generate_corpus(const SyntheticGrammar& grammar, std::size_t n, Rng& rng, const std::string& id_prefix,
                       const std::string& language) {
  Corpus out;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& dom = grammar.domains[rng.index(grammar.domains.size())];
    const auto& intent = dom.intents[rng.index(dom.intents.size())];
    const auto& tmpl = intent.templates[rng.index(intent.templates.size())];
    AnnotatedUtterance u;
    u.id = id_prefix + std::to_string(k);
    u.language = language;
    u.domain = dom.name;
    u.intent = intent.name;
    for (const auto& piece : tmpl) {
      if (!piece.word.empty()) {
        u.tokens.push_back(piece.word);
        continue;
      }
      std::size_t type = piece.slot_type;
      if (grammar.config.shared_slot_contexts) type = rng.index(dom.slots.size());
      const auto& value = dom.slots[type].values[rng.index(dom.slots[type].values.size())];
      const std::size_t start = u.tokens.size();
      u.tokens.insert(u.tokens.end(), value.begin(), value.end());
      u.slots.push_back({start, u.tokens.size(), dom.slots[type].name});
    }
    out.push_back(std::move(u));
  }
  return out;
}

std::string WordMapping::map(const std::string& word) const {
  auto it = words.find(word);
  return it == words.end() ? word : it->second;
}

WordMapping make_word_mapping(const std::vector<std::string>& words, const std::string& language, std::uint64_t seed) {
  WordMapping m;
  m.language = language;
  const auto fresh = invented_words(words.size(), seed, language + "_");
  for (std::size_t i = 0; i < words.size(); ++i) m.words.emplace(words[i], fresh[i]);
  return m;
}

Corpus translate_corpus(const Corpus& corpus, const WordMapping& mapping) {
  Corpus out = corpus;
  for (AnnotatedUtterance& u : out) {
    u.language = mapping.language;
    for (std::string& t : u.tokens) t = mapping.map(t);
  }
  return out;
}

std::vector<ParallelPair> substitution_parallel(std::size_t vocab_size, std::size_t pairs, std::size_t max_length,
                                                const std::string& source, const std::string& target,
                                                std::uint64_t seed) {
  require(vocab_size >= 1 && max_length >= 1, "substitution corpus needs words and a positive length");
  const auto src_words = invented_words(vocab_size, seed, source + "_");
  const auto tgt_words = invented_words(vocab_size, seed + 1, target + "_");
  Rng rng(seed, "sentences");
  std::vector<ParallelPair> out;
  for (std::size_t k = 0; k < pairs; ++k) {
    ParallelPair p;
    p.task = {source, target};
    const std::size_t len = 1 + rng.index(max_length);
    for (std::size_t i = 0; i < len; ++i) {
      const std::size_t w = rng.index(vocab_size);
      p.source.push_back(src_words[w]);
      p.target.push_back(tgt_words[w]);
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace xnlu
