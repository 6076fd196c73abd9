#include "xnlu/transfer.hpp"

#include <algorithm>

#include "xnlu/error.hpp"
#include "xnlu/numeric.hpp"
#include "xnlu/random.hpp"

namespace xnlu {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::target_only:
      return "target_only";
    case Strategy::translate_train:
      return "translate_train";
    case Strategy::cross_lingual:
      return "cross_lingual";
    case Strategy::zero_shot:
      return "zero_shot";
  }
  return "target_only";
}

Strategy parse_strategy(const std::string& text) {
  std::string t = text;
  std::replace(t.begin(), t.end(), '-', '_');
  for (Strategy s : {Strategy::target_only, Strategy::translate_train, Strategy::cross_lingual, Strategy::zero_shot})
    if (to_string(s) == t) return s;
  throw PreconditionError("unknown strategy '" + text +
                          "' (expected target_only, translate_train, cross_lingual or zero_shot)");
}

void TransferPlan::validate() const {
  require(repeats >= 1, "repeat count must be at least 1");
  if (sample_size) {
    require(std::find(std::begin(kLearningCurveSizes), std::end(kLearningCurveSizes), *sample_size) !=
                std::end(kLearningCurveSizes),
            "sample size must be one of 10, 50, 100, 200 (or absent for all data)");
    require(strategy != Strategy::zero_shot, "zero_shot uses no target-language data, so it takes no sample size");
  }
}

nlohmann::json TransferPlan::to_json() const {
  return {{"strategy", to_string(strategy)},
          {"provider", to_string(provider)},
          {"sample_size", sample_size ? nlohmann::json(*sample_size) : nlohmann::json("all")},
          {"repeats", repeats},
          {"seed", seed}};
}

TransferPlan TransferPlan::from_json(const nlohmann::json& j) {
  TransferPlan p;
  try {
    p.strategy = parse_strategy(j.value("strategy", to_string(p.strategy)));
    p.provider = parse_provider_kind(j.value("provider", to_string(p.provider)));
    if (j.contains("sample_size") && !(j["sample_size"].is_string() && j["sample_size"] == "all") &&
        !j["sample_size"].is_null())
      p.sample_size = j["sample_size"].get<std::size_t>();
    p.repeats = j.value("repeats", p.repeats);
    p.seed = j.value("seed", p.seed);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed transfer plan: ") + e.what());
  }
  return p;
}

std::vector<SlotSpan> project_slots(std::span<const SlotSpan> source_spans, const Tensor& attention,
                                    std::size_t target_length) {
  if (target_length == 0) return {};
  require(attention.rank() == 2 && attention.rows() == target_length,
          "attention has " + std::to_string(attention.empty() ? 0 : attention.rows()) + " rows for " +
              std::to_string(target_length) + " target tokens");
  const std::size_t source_length = attention.cols();
  validate_spans(source_spans, source_length);
  std::vector<const std::string*> source_label(source_length, nullptr);
  for (const SlotSpan& s : source_spans)
    for (std::size_t i = s.start; i < s.end; ++i) source_label[i] = &s.label;

  std::vector<SlotSpan> out;
  const std::string* open = nullptr;
  for (std::size_t t = 0; t < target_length; ++t) {
    const std::string* label = source_label[argmax(attention.row(t))];
    if (label != nullptr && open != nullptr && *label == *open) {
      out.back().end = t + 1;
    } else if (label != nullptr) {
      out.push_back({t, t + 1, *label});
    }
    open = label;
  }
  return out;
}

TranslatedCorpus make_translate_train_corpus(const Corpus& corpus, const Seq2SeqModel& model, const Task& task,
                                             std::size_t beam) {
  require(model.supports(task), "translation model does not support task " + task.tag());
  TranslatedCorpus out;
  for (const AnnotatedUtterance& u : corpus) {
    Translation tr = translate_with_attention(model, u.tokens, task, beam);
    if (tr.tokens.empty()) {
      ++out.dropped;
      continue;
    }
    AnnotatedUtterance v;
    v.id = u.id;
    v.language = task.target;
    v.domain = u.domain;
    v.intent = u.intent;
    v.slots = project_slots(u.slots, tr.attention, tr.tokens.size());
    v.tokens = std::move(tr.tokens);
    out.corpus.push_back(std::move(v));
  }
  return out;
}

Corpus mix_and_upsample(const Corpus& high, const Corpus& low, std::uint64_t seed, Strategy strategy) {
  require(!high.empty(), "high-resource corpus is empty");
  if (strategy == Strategy::zero_shot) {
    require(low.empty(), "zero_shot admits no target-language training data");
    return high;
  }
  require(!low.empty(), "target-language corpus is empty (only zero_shot trains without it)");
  const std::size_t copies = (high.size() + low.size() - 1) / low.size();
  Corpus out = high;
  out.reserve(high.size() + copies * low.size());
  for (std::size_t c = 0; c < copies; ++c) out.insert(out.end(), low.begin(), low.end());
  Rng rng(seed, "upsample");
  rng.shuffle(out);
  return out;
}

std::vector<LearningCurveSplit> sample_learning_curve_splits(const Corpus& target, std::size_t n,
                                                             std::size_t repeats, std::uint64_t seed) {
  require(std::find(std::begin(kLearningCurveSizes), std::end(kLearningCurveSizes), n) !=
              std::end(kLearningCurveSizes),
          "sample size must be one of 10, 50, 100, 200");
  require(repeats >= 1, "repeat count must be at least 1");
  std::vector<std::pair<std::string, std::vector<std::size_t>>> by_domain;
  for (std::size_t i = 0; i < target.size(); ++i) {
    auto it = std::find_if(by_domain.begin(), by_domain.end(),
                           [&](const auto& d) { return d.first == target[i].domain; });
    if (it == by_domain.end()) {
      by_domain.push_back({target[i].domain, {}});
      it = by_domain.end() - 1;
    }
    it->second.push_back(i);
  }
  require(!by_domain.empty(), "target corpus is empty");
  for (const auto& [domain, idx] : by_domain)
    require(idx.size() >= 2 * n, "domain '" + domain + "' has " + std::to_string(idx.size()) +
                                     " utterances, fewer than the " + std::to_string(2 * n) + " needed");

  std::vector<LearningCurveSplit> splits;
  for (std::size_t r = 0; r < repeats; ++r) {
    Rng rng(seed + r, "sampling");
    LearningCurveSplit split;
    for (const auto& [domain, idx] : by_domain) {
      std::vector<std::size_t> order = idx;
      rng.shuffle(order);
      for (std::size_t k = 0; k < n; ++k) split.train.push_back(target[order[k]]);
      for (std::size_t k = n; k < 2 * n; ++k) split.selection.push_back(target[order[k]]);
    }
    splits.push_back(std::move(split));
  }
  return splits;
}

}  // namespace xnlu
