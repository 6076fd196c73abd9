#pragma once

#include <span>
#include <vector>

namespace xnlu {

/// log(sum(exp(v))) computed with a max shift. Throws on empty input.
double log_sum_exp(std::span<const double> v);

/// Max-shifted softmax.
std::vector<double> softmax(std::span<const double> v);

/// Index of the first maximal element (lowest index wins ties).
std::size_t argmax(std::span<const double> v);

}  // namespace xnlu
