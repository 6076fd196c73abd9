#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "xnlu/corpus.hpp"

namespace xnlu {

/// B-label at span starts, I-label inside spans, O elsewhere.
std::vector<std::string> spans_to_bio(std::span<const SlotSpan> spans, std::size_t length);

/// Inverse of spans_to_bio. A stray I-x (not preceded by B-x or I-x) opens a
/// new span as if it were B-x, so the result always satisfies the span
/// invariants. Tags other than O, B-*, I-* are rejected.
std::vector<SlotSpan> bio_to_spans(std::span<const std::string> tags);

/// Integer label inventory for a slot-type list: 0 = O, then B-/I- pairs.
class BioLabels {
 public:
  BioLabels() : BioLabels(std::vector<std::string>{}) {}
  explicit BioLabels(const std::vector<std::string>& slot_types);

  std::size_t size() const noexcept { return tags_.size(); }
  const std::string& tag(std::size_t id) const { return tags_.at(id); }
  std::size_t id(const std::string& tag) const;
  const std::vector<std::string>& tags() const noexcept { return tags_; }

  std::vector<std::size_t> encode(std::span<const SlotSpan> spans, std::size_t length) const;
  std::vector<SlotSpan> decode(std::span<const std::size_t> ids) const;

 private:
  std::vector<std::string> tags_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace xnlu
