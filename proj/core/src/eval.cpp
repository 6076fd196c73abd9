#include "xnlu/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_map>

#include <openssl/evp.h>

#include "xnlu/error.hpp"

namespace xnlu {

std::size_t count_true_positives(std::span<const SlotSpan> gold, std::span<const SlotSpan> predicted) {
  std::vector<bool> used(gold.size(), false);
  std::size_t tp = 0;
  for (const SlotSpan& p : predicted) {
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (!used[i] && gold[i] == p) {
        used[i] = true;
        ++tp;
        break;
      }
    }
  }
  return tp;
}

namespace {

bool valid_span_set(std::span<const SlotSpan> spans) {
  std::size_t length = 0;
  for (const SlotSpan& s : spans) length = std::max(length, s.end);
  return spans_valid(spans, length);
}

double f1_of(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

}  // namespace

PrecisionRecall slot_prf(std::span<const SlotSpan> gold, std::span<const SlotSpan> predicted) {
  require(valid_span_set(gold), "slot_prf: invalid gold spans");
  require(valid_span_set(predicted), "slot_prf: invalid predicted spans");
  if (gold.empty() && predicted.empty()) return {1.0, 1.0, 1.0};
  const double tp = static_cast<double>(count_true_positives(gold, predicted));
  PrecisionRecall r;
  r.precision = predicted.empty() ? 0.0 : tp / static_cast<double>(predicted.size());
  r.recall = gold.empty() ? 0.0 : tp / static_cast<double>(gold.size());
  r.f1 = f1_of(r.precision, r.recall);
  return r;
}

bool exact_match(const AnnotatedUtterance& gold, const Prediction& predicted) {
  if (gold.domain != predicted.domain || gold.intent != predicted.intent) return false;
  if (gold.slots.size() != predicted.slots.size()) return false;
  return count_true_positives(gold.slots, predicted.slots) == gold.slots.size();
}

namespace {

std::vector<const Prediction*> align(const Corpus& gold, std::span<const Prediction> predictions) {
  require(gold.size() == predictions.size(), "expected " + std::to_string(gold.size()) + " predictions, got " +
                                                 std::to_string(predictions.size()));
  std::unordered_map<std::string, const Prediction*> by_id;
  for (const Prediction& p : predictions)
    require(by_id.emplace(p.id, &p).second, "duplicate prediction id '" + p.id + "'");
  std::vector<const Prediction*> out;
  for (const AnnotatedUtterance& u : gold) {
    auto it = by_id.find(u.id);
    require(it != by_id.end(), "no prediction for utterance '" + u.id + "'");
    out.push_back(it->second);
  }
  return out;
}

}  // namespace

double exact_match_rate(const Corpus& gold, std::span<const Prediction> predictions) {
  const auto aligned = align(gold, predictions);
  if (gold.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) hits += exact_match(gold[i], *aligned[i]) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

MetricCounts& MetricCounts::operator+=(const MetricCounts& o) {
  utterances += o.utterances;
  domain_correct += o.domain_correct;
  intent_correct += o.intent_correct;
  exact_matches += o.exact_matches;
  gold_spans += o.gold_spans;
  predicted_spans += o.predicted_spans;
  true_positive_spans += o.true_positive_spans;
  return *this;
}

std::vector<std::pair<std::string, MetricCounts>> count_by_gold_domain(const Corpus& gold,
                                                                       std::span<const Prediction> predictions) {
  const auto aligned = align(gold, predictions);
  std::vector<std::pair<std::string, MetricCounts>> out;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const AnnotatedUtterance& g = gold[i];
    const Prediction& p = *aligned[i];
    require(valid_span_set(p.slots), "prediction '" + p.id + "' has invalid spans");
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& e) { return e.first == g.domain; });
    if (it == out.end()) {
      out.emplace_back(g.domain, MetricCounts{});
      it = out.end() - 1;
    }
    MetricCounts& c = it->second;
    ++c.utterances;
    // Intent labels are only comparable within the right domain.
    const bool domain_ok = g.domain == p.domain;
    c.domain_correct += domain_ok ? 1 : 0;
    c.intent_correct += domain_ok && g.intent == p.intent ? 1 : 0;
    c.exact_matches += exact_match(g, p) ? 1 : 0;
    c.gold_spans += g.slots.size();
    c.predicted_spans += p.slots.size();
    c.true_positive_spans += count_true_positives(g.slots, p.slots);
  }
  return out;
}

MetricReport micro_average(std::span<const MetricCounts> per_domain) {
  MetricReport r;
  for (const MetricCounts& c : per_domain) r.counts += c;
  const MetricCounts& t = r.counts;
  auto rate = [&](std::size_t num, std::size_t den) {
    if (den == 0) {
      r.undefined_rates = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  r.exact_match = rate(t.exact_matches, t.utterances);
  r.domain_accuracy = rate(t.domain_correct, t.utterances);
  r.intent_accuracy = rate(t.intent_correct, t.utterances);
  r.slot_precision = rate(t.true_positive_spans, t.predicted_spans);
  r.slot_recall = rate(t.true_positive_spans, t.gold_spans);
  r.slot_f1 = f1_of(r.slot_precision, r.slot_recall);
  return r;
}

MetricReport evaluate(const Corpus& gold, std::span<const Prediction> predictions) {
  std::vector<MetricCounts> counts;
  for (auto& [domain, c] : count_by_gold_domain(gold, predictions)) counts.push_back(c);
  return micro_average(counts);
}

nlohmann::ordered_json MetricReport::to_json() const {
  nlohmann::ordered_json j;
  j["exact_match"] = exact_match;
  j["domain_accuracy"] = domain_accuracy;
  j["intent_accuracy"] = intent_accuracy;
  j["slot_precision"] = slot_precision;
  j["slot_recall"] = slot_recall;
  j["slot_f1"] = slot_f1;
  nlohmann::ordered_json c;
  c["utterances"] = counts.utterances;
  c["domain_correct"] = counts.domain_correct;
  c["intent_correct"] = counts.intent_correct;
  c["exact_matches"] = counts.exact_matches;
  c["gold_spans"] = counts.gold_spans;
  c["predicted_spans"] = counts.predicted_spans;
  c["true_positive_spans"] = counts.true_positive_spans;
  j["counts"] = std::move(c);
  j["undefined_rates"] = undefined_rates;
  return j;
}

RepeatSummary summarize(std::span<const double> values) {
  require(!values.empty(), "cannot summarize zero runs");
  RepeatSummary s{0.0, values[0], values[0]};
  for (double v : values) {
    s.average += v;
    s.minimum = std::min(s.minimum, v);
    s.maximum = std::max(s.maximum, v);
  }
  s.average /= static_cast<double>(values.size());
  return s;
}

std::string git_blob_hash(const std::string& content) {
  const std::string header = "blob " + std::to_string(content.size());
  std::string object = header;
  object.push_back('\0');
  object += content;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(object.data(), object.size(), digest, &length, EVP_sha1(), nullptr) != 1)
    throw std::runtime_error("SHA-1 digest failed");
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) {
    char byte[3];
    std::snprintf(byte, sizeof byte, "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

}  // namespace xnlu
