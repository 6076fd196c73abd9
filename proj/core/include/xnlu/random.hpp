#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace xnlu {

/// Derives an independent seed for a named sub-stream ("init", "shuffle",
/// "dropout", "sampling", ...). Every random decision in the library flows
/// from one experiment seed through this function.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);

/// Seeded generator with platform-independent draws (the standard
/// distributions are implementation-defined, so they are not used).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}
  Rng(std::uint64_t seed, std::string_view stream) : engine_(derive_seed(seed, stream)) {}

  std::uint64_t next() { return engine_(); }
  double uniform();                       // [0, 1)
  double uniform(double lo, double hi);   // [lo, hi)
  std::size_t index(std::size_t n);       // [0, n), unbiased
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace xnlu
