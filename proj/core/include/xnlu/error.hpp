#pragma once

#include <stdexcept>
#include <string>

namespace xnlu {

/// A caller violated an operation's precondition (shape, range, emptiness).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// External data (corpus files, checkpoints, configs) could not be accepted.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation produced NaN or Inf.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw PreconditionError(message);
}

}  // namespace xnlu
