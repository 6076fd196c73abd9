#include "xnlu/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "xnlu/error.hpp"
#include "xnlu/tokenize.hpp"

namespace xnlu {

bool spans_valid(std::span<const SlotSpan> spans, std::size_t length) noexcept {
  std::size_t previous_end = 0;
  for (const SlotSpan& s : spans) {
    if (s.start >= s.end || s.end > length || s.start < previous_end || s.label.empty()) return false;
    previous_end = s.end;
  }
  return true;
}

void validate_spans(std::span<const SlotSpan> spans, std::size_t length) {
  std::size_t previous_end = 0;
  for (const SlotSpan& s : spans) {
    require(!s.label.empty(), "slot span without a label");
    require(s.start < s.end, "slot span [" + std::to_string(s.start) + ", " + std::to_string(s.end) + ") is empty");
    require(s.end <= length, "slot span [" + std::to_string(s.start) + ", " + std::to_string(s.end) +
                                 ") exceeds utterance length " + std::to_string(length));
    require(s.start >= previous_end, "slot spans overlap or are unsorted at token " + std::to_string(s.start));
    previous_end = s.end;
  }
}

// ---- Schema --------------------------------------------------------------

Schema::Schema(std::vector<DomainSchema> domains) : domains_(std::move(domains)) {
  std::set<std::string> seen;
  for (const DomainSchema& d : domains_) {
    require(!d.name.empty(), "schema domain without a name");
    require(seen.insert(d.name).second, "schema lists domain '" + d.name + "' twice");
    require(!d.intents.empty(), "schema domain '" + d.name + "' has no intents");
  }
}

Schema Schema::infer(std::span<const Corpus* const> corpora) {
  std::map<std::string, std::pair<std::set<std::string>, std::set<std::string>>> found;
  for (const Corpus* c : corpora)
    for (const AnnotatedUtterance& u : *c) {
      auto& [intents, slots] = found[u.domain];
      intents.insert(u.intent);
      for (const SlotSpan& s : u.slots) slots.insert(s.label);
    }
  std::vector<DomainSchema> domains;
  for (auto& [name, sets] : found)
    domains.push_back({name, {sets.first.begin(), sets.first.end()}, {sets.second.begin(), sets.second.end()}});
  return Schema(std::move(domains));
}

Schema Schema::infer(const Corpus& corpus) {
  const Corpus* one[] = {&corpus};
  return infer(one);
}

Schema Schema::from_json(const nlohmann::json& j) {
  try {
    std::vector<DomainSchema> domains;
    for (const auto& d : j.at("domains")) {
      DomainSchema ds;
      ds.name = d.at("name").get<std::string>();
      ds.intents = d.at("intents").get<std::vector<std::string>>();
      ds.slot_types = d.value("slots", std::vector<std::string>{});
      domains.push_back(std::move(ds));
    }
    return Schema(std::move(domains));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed schema: ") + e.what());
  }
}

Schema Schema::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open schema file '" + path + "'");
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
}

nlohmann::json Schema::to_json() const {
  nlohmann::json domains = nlohmann::json::array();
  for (const DomainSchema& d : domains_)
    domains.push_back({{"name", d.name}, {"intents", d.intents}, {"slots", d.slot_types}});
  return {{"domains", domains}};
}

const DomainSchema* Schema::find(const std::string& domain) const {
  for (const DomainSchema& d : domains_)
    if (d.name == domain) return &d;
  return nullptr;
}

std::optional<std::size_t> Schema::domain_index(const std::string& domain) const {
  for (std::size_t i = 0; i < domains_.size(); ++i)
    if (domains_[i].name == domain) return i;
  return std::nullopt;
}

std::size_t Schema::total_intents() const {
  std::size_t n = 0;
  for (const DomainSchema& d : domains_) n += d.intents.size();
  return n;
}

std::size_t Schema::distinct_slot_types() const {
  std::set<std::string> all;
  for (const DomainSchema& d : domains_) all.insert(d.slot_types.begin(), d.slot_types.end());
  return all.size();
}

std::string Schema::check(const AnnotatedUtterance& u) const {
  const DomainSchema* d = find(u.domain);
  if (d == nullptr) return "unknown domain '" + u.domain + "'";
  if (std::find(d->intents.begin(), d->intents.end(), u.intent) == d->intents.end())
    return "unknown intent '" + u.intent + "' for domain '" + u.domain + "'";
  for (const SlotSpan& s : u.slots)
    if (std::find(d->slot_types.begin(), d->slot_types.end(), s.label) == d->slot_types.end())
      return "unknown slot type '" + s.label + "' for domain '" + u.domain + "'";
  return {};
}

bool operator==(const Schema& a, const Schema& b) {
  if (a.domains_.size() != b.domains_.size()) return false;
  for (std::size_t i = 0; i < a.domains_.size(); ++i) {
    const auto& x = a.domains_[i];
    const auto& y = b.domains_[i];
    if (x.name != y.name || x.intents != y.intents || x.slot_types != y.slot_types) return false;
  }
  return true;
}

// ---- JSONL ---------------------------------------------------------------

nlohmann::ordered_json utterance_to_json(const AnnotatedUtterance& u) {
  nlohmann::ordered_json slots = nlohmann::ordered_json::array();
  for (const SlotSpan& s : u.slots) {
    nlohmann::ordered_json span;
    span["start"] = s.start;
    span["end"] = s.end;
    span["label"] = s.label;
    slots.push_back(std::move(span));
  }
  nlohmann::ordered_json j;
  j["id"] = u.id;
  j["language"] = u.language;
  j["domain"] = u.domain;
  j["intent"] = u.intent;
  j["tokens"] = u.tokens;
  j["slots"] = std::move(slots);
  return j;
}

AnnotatedUtterance utterance_from_json(const nlohmann::json& j) {
  AnnotatedUtterance u;
  u.id = j.at("id").get<std::string>();
  u.language = j.at("language").get<std::string>();
  u.domain = j.at("domain").get<std::string>();
  u.intent = j.at("intent").get<std::string>();
  u.tokens = j.at("tokens").get<std::vector<std::string>>();
  if (j.contains("slots")) {
    for (const auto& s : j.at("slots"))
      u.slots.push_back({s.at("start").get<std::size_t>(), s.at("end").get<std::size_t>(),
                         s.at("label").get<std::string>()});
  }
  std::stable_sort(u.slots.begin(), u.slots.end(),
                   [](const SlotSpan& a, const SlotSpan& b) { return a.start < b.start; });
  return u;
}

Corpus parse_corpus(std::istream& in, const std::string& source_name, const Schema* schema) {
  Corpus corpus;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source_name + ":" + std::to_string(line_no) + ": ";
    AnnotatedUtterance u;
    try {
      u = utterance_from_json(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + "malformed utterance: " + e.what());
    }
    if (u.tokens.empty()) throw DataError(where + "utterance '" + u.id + "' has no tokens");
    try {
      validate_spans(u.slots, u.tokens.size());
    } catch (const PreconditionError& e) {
      throw DataError(where + e.what());
    }
    if (schema) {
      if (std::string why = schema->check(u); !why.empty()) throw DataError(where + why);
    }
    if (!ids.insert(u.id).second) throw DataError(where + "duplicate utterance id '" + u.id + "'");
    corpus.push_back(std::move(u));
  }
  return corpus;
}

Corpus load_corpus(const std::string& path, const Schema* schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file '" + path + "'");
  return parse_corpus(in, path, schema);
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const AnnotatedUtterance& u : corpus) {
    out += utterance_to_json(u).dump();
    out += '\n';
  }
  return out;
}

void save_corpus(const std::string& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write corpus file '" + path + "'");
  out << serialize_corpus(corpus);
}

std::vector<std::vector<std::string>> preprocess_corpus(const std::vector<std::vector<std::string>>& sentences,
                                                        std::size_t max_tokens) {
  std::vector<std::vector<std::string>> out;
  std::set<std::vector<std::string>> seen;
  for (const auto& sentence : sentences) {
    std::vector<std::string> lowered;
    lowered.reserve(sentence.size());
    for (const std::string& tok : sentence) lowered.push_back(utf8_lowercase(tok));
    if (lowered.size() > max_tokens) continue;
    if (!seen.insert(lowered).second) continue;
    out.push_back(std::move(lowered));
  }
  return out;
}

std::vector<std::pair<std::string, std::size_t>> count_by_domain(const Corpus& corpus) {
  std::vector<std::pair<std::string, std::size_t>> counts;
  for (const AnnotatedUtterance& u : corpus) {
    auto it = std::find_if(counts.begin(), counts.end(), [&](const auto& c) { return c.first == u.domain; });
    if (it == counts.end())
      counts.emplace_back(u.domain, 1);
    else
      ++it->second;
  }
  return counts;
}

// ---- static vectors ------------------------------------------------------

StaticVectors::StaticVectors(std::vector<std::string> tokens, Tensor table)
    : tokens_(std::move(tokens)), table_(std::move(table)) {
  require(table_.rank() == 2 && table_.rows() == tokens_.size(), "static vector table does not match token list");
  for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], i);
}

StaticVectors StaticVectors::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file '" + path + "'");
  std::vector<std::string> tokens;
  std::vector<double> values;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  std::unordered_set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::vector<std::string> parts;
    for (std::string f; fields >> f;) parts.push_back(f);
    if (parts.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no) + ": ";
    if (line_no == 1 && parts.size() == 2 &&
        std::all_of(parts[0].begin(), parts[0].end(), ::isdigit) &&
        std::all_of(parts[1].begin(), parts[1].end(), ::isdigit)) {
      dim = std::stoul(parts[1]);
      continue;
    }
    if (parts.size() < 2) throw DataError(where + "expected a token followed by its vector");
    if (dim == 0) dim = parts.size() - 1;
    if (parts.size() - 1 != dim)
      throw DataError(where + "vector has " + std::to_string(parts.size() - 1) + " values, expected " +
                      std::to_string(dim));
    if (!seen.insert(parts[0]).second) continue;  // first occurrence wins
    tokens.push_back(parts[0]);
    for (std::size_t i = 1; i < parts.size(); ++i) {
      try {
        values.push_back(std::stod(parts[i]));
      } catch (const std::exception&) {
        throw DataError(where + "'" + parts[i] + "' is not a number");
      }
    }
  }
  if (tokens.empty()) throw DataError("embedding file '" + path + "' holds no vectors");
  const std::size_t n = tokens.size();
  return StaticVectors(std::move(tokens), Tensor::matrix(n, dim, std::move(values)));
}

std::optional<std::size_t> StaticVectors::find(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

}  // namespace xnlu
