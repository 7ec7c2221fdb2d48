#include "phlab/rng.hpp"

#include "phlab/errors.hpp"

namespace phlab {

std::uint64_t CounterRng::mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

CounterRng CounterRng::substream(std::uint64_t stream_id) const {
  return CounterRng(mix64(key_ ^ mix64(stream_id + 0xD1B54A32D192ED03ULL)));
}

std::uint64_t CounterRng::below(std::uint64_t n) {
  if (n == 0) throw ConfigError("CounterRng::below: empty range");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  for (;;) {
    const std::uint64_t v = next_u64();
    if (v < limit) return v % n;
  }
}

}  // namespace phlab
