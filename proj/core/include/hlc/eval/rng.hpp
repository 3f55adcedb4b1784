#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace hlc::eval {

/// mt19937_64 with a fixed, platform-independent index draw so seeded runs
/// reproduce across standard libraries (std distributions do not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n): draws x until x >= 2^64 mod n, returns x mod n.
  std::size_t uniform_index(std::size_t n);

  /// Fisher-Yates, swapping position i with uniform_index(i + 1) for
  /// i = size-1 down to 1.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = uniform_index(i);
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace hlc::eval
