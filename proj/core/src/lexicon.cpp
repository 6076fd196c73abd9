#include "xnlu/lexicon.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "xnlu/error.hpp"

namespace xnlu {

namespace {

void sort_row(std::vector<LexiconEntry>& row) {
  std::sort(row.begin(), row.end(), [](const LexiconEntry& a, const LexiconEntry& b) {
    return a.probability != b.probability ? a.probability > b.probability : a.target < b.target;
  });
}

}  // namespace

LexiconTable::LexiconTable(std::map<std::string, std::vector<LexiconEntry>> rows) : rows_(std::move(rows)) {
  for (auto& [source, row] : rows_) {
    double total = 0.0;
    for (const LexiconEntry& e : row) {
      require(e.probability > 0.0 && e.probability <= 1.0 + 1e-12,
              "lexicon probability for '" + source + "' outside (0, 1]");
      total += e.probability;
    }
    require(std::abs(total - 1.0) < 1e-6, "lexicon row for '" + source + "' does not sum to 1");
    sort_row(row);
  }
}

std::span<const LexiconEntry> LexiconTable::entries(const std::string& source) const {
  auto it = rows_.find(source);
  if (it == rows_.end()) return {};
  return it->second;
}

double LexiconTable::probability(const std::string& source, const std::string& target) const {
  for (const LexiconEntry& e : entries(source))
    if (e.target == target) return e.probability;
  return 0.0;
}

nlohmann::json LexiconTable::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [source, row] : rows_) {
    nlohmann::json entries = nlohmann::json::array();
    for (const LexiconEntry& e : row) entries.push_back({e.target, e.probability});
    j[source] = std::move(entries);
  }
  return j;
}

LexiconTable LexiconTable::from_json(const nlohmann::json& j) {
  std::map<std::string, std::vector<LexiconEntry>> rows;
  try {
    for (const auto& [source, entries] : j.items())
      for (const auto& e : entries) rows[source].push_back({e.at(0).get<std::string>(), e.at(1).get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed lexicon: ") + e.what());
  }
  try {
    return LexiconTable(std::move(rows));
  } catch (const PreconditionError& e) {
    throw DataError(e.what());
  }
}

LexiconTable ibm1_lexicon(std::span<const SentencePair> pairs, std::size_t iterations) {
  require(iterations >= 1, "IBM Model 1 needs at least one EM iteration");
  require(!pairs.empty(), "cannot align an empty parallel corpus");

  // Intern tokens so the EM loops work on integer pairs.
  std::unordered_map<std::string, std::size_t> src_ids, tgt_ids;
  std::vector<std::string> src_words, tgt_words;
  auto intern = [](auto& ids, auto& words, const std::string& w) {
    auto [it, inserted] = ids.emplace(w, words.size());
    if (inserted) words.push_back(w);
    return it->second;
  };
  std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> corpus;
  for (const SentencePair& p : pairs) {
    std::vector<std::size_t> s, t;
    for (const auto& w : p.source) s.push_back(intern(src_ids, src_words, w));
    for (const auto& w : p.target) t.push_back(intern(tgt_ids, tgt_words, w));
    if (!s.empty() && !t.empty()) corpus.emplace_back(std::move(s), std::move(t));
  }
  require(!corpus.empty(), "cannot align an empty parallel corpus");

  // t(f | e) over co-occurring pairs, keyed by e * |F| + f.
  const std::size_t nf = tgt_words.size();
  std::unordered_map<std::size_t, double> prob;
  std::vector<std::vector<std::size_t>> cooccur(src_words.size());
  for (const auto& [s, t] : corpus)
    for (std::size_t e : s)
      for (std::size_t f : t) prob.emplace(e * nf + f, 0.0);
  for (const auto& [key, value] : prob) cooccur[key / nf].push_back(key % nf);
  for (auto& targets : cooccur) std::sort(targets.begin(), targets.end());
  for (std::size_t e = 0; e < cooccur.size(); ++e)
    for (std::size_t f : cooccur[e]) prob[e * nf + f] = 1.0 / static_cast<double>(cooccur[e].size());

  std::unordered_map<std::size_t, double> counts;
  std::vector<double> totals(src_words.size());
  for (std::size_t it = 0; it < iterations; ++it) {
    counts.clear();
    std::fill(totals.begin(), totals.end(), 0.0);
    for (const auto& [s, t] : corpus) {
      for (std::size_t f : t) {
        double z = 0.0;
        for (std::size_t e : s) z += prob[e * nf + f];
        for (std::size_t e : s) {
          const double c = prob[e * nf + f] / z;
          counts[e * nf + f] += c;
          totals[e] += c;
        }
      }
    }
    for (auto& [key, value] : prob) value = counts[key] / totals[key / nf];
  }

  std::map<std::string, std::vector<LexiconEntry>> rows;
  for (std::size_t e = 0; e < cooccur.size(); ++e) {
    auto& row = rows[src_words[e]];
    double total = 0.0;
    for (std::size_t f : cooccur[e]) {
      const double p = prob[e * nf + f];
      if (p > 0.0) {
        row.push_back({tgt_words[f], p});
        total += p;
      }
    }
    for (LexiconEntry& entry : row) entry.probability /= total;
  }
  return LexiconTable(std::move(rows));
}

std::vector<std::size_t> build_output_candidates(std::span<const std::string> source_tokens,
                                                 const LexiconTable& lexicon,
                                                 std::span<const std::size_t> frequent, const Vocabulary& vocab,
                                                 std::size_t limit) {
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < vocab.reserved_count(); ++i) ids.push_back(i);
  for (std::size_t f : frequent) {
    require(f < vocab.size(), "frequent-word id outside the vocabulary");
    ids.push_back(f);
  }
  for (const std::string& s : source_tokens) {
    const auto entries = lexicon.entries(s);
    for (std::size_t k = 0; k < entries.size() && k < limit; ++k) ids.push_back(vocab.id(entries[k].target));
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

}  // namespace xnlu
