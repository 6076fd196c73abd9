#include "xnlu/bio.hpp"

#include "xnlu/error.hpp"

namespace xnlu {

std::vector<std::string> spans_to_bio(std::span<const SlotSpan> spans, std::size_t length) {
  validate_spans(spans, length);
  std::vector<std::string> tags(length, "O");
  for (const SlotSpan& s : spans) {
    tags[s.start] = "B-" + s.label;
    for (std::size_t t = s.start + 1; t < s.end; ++t) tags[t] = "I-" + s.label;
  }
  return tags;
}

std::vector<SlotSpan> bio_to_spans(std::span<const std::string> tags) {
  std::vector<SlotSpan> spans;
  bool open = false;
  for (std::size_t t = 0; t < tags.size(); ++t) {
    const std::string& tag = tags[t];
    if (tag == "O") {
      open = false;
      continue;
    }
    require(tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-', "malformed BIO tag '" + tag + "'");
    const std::string label = tag.substr(2);
    const bool continues = tag[0] == 'I' && open && spans.back().label == label;
    if (continues) {
      spans.back().end = t + 1;
    } else {
      spans.push_back({t, t + 1, label});
      open = true;
    }
  }
  return spans;
}

BioLabels::BioLabels(const std::vector<std::string>& slot_types) {
  tags_.push_back("O");
  for (const std::string& s : slot_types) {
    tags_.push_back("B-" + s);
    tags_.push_back("I-" + s);
  }
  for (std::size_t i = 0; i < tags_.size(); ++i) {
    require(index_.emplace(tags_[i], i).second, "slot type listed twice: '" + tags_[i] + "'");
  }
}

std::size_t BioLabels::id(const std::string& tag) const {
  auto it = index_.find(tag);
  require(it != index_.end(), "unknown BIO tag '" + tag + "'");
  return it->second;
}

std::vector<std::size_t> BioLabels::encode(std::span<const SlotSpan> spans, std::size_t length) const {
  std::vector<std::size_t> ids;
  for (const std::string& t : spans_to_bio(spans, length)) ids.push_back(id(t));
  return ids;
}

std::vector<SlotSpan> BioLabels::decode(std::span<const std::size_t> ids) const {
  std::vector<std::string> tags;
  tags.reserve(ids.size());
  for (std::size_t i : ids) tags.push_back(tag(i));
  return bio_to_spans(tags);
}

}  // namespace xnlu
