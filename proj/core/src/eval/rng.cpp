#include "hlc/eval/rng.hpp"

#include "hlc/error.hpp"

namespace hlc::eval {

std::size_t Rng::uniform_index(std::size_t n) {
  if (n == 0) {
    throw Error(ErrorCode::ConfigError, "uniform_index over an empty range");
  }
  const std::uint64_t bound = n;
  const std::uint64_t threshold = (0 - bound) % bound;
  std::uint64_t x = engine_();
  while (x < threshold) {
    x = engine_();
  }
  return static_cast<std::size_t>(x % bound);
}

}  // namespace hlc::eval
