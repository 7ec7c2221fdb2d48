#pragma once

#include <cstdint>

namespace phlab {

// Counter-based SplitMix64. Draw k of a stream with key s is
//   mix64(s + (k + 1) * 0x9E3779B97F4A7C15)
// where mix64 is the SplitMix64 finalizer. Substreams use the key
// mix64(seed ^ mix64(stream_id + 0xD1B54A32D192ED03)).
// Uniform doubles are (draw >> 11) * 2^-53, so they lie in [0, 1).
class CounterRng {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static std::uint64_t mix64(std::uint64_t z);
  CounterRng substream(std::uint64_t stream_id) const;

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t at(std::uint64_t k) const { return mix64(key_ + (k + 1) * kGamma); }
  std::uint64_t next_u64() { return at(counter_++); }
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }
  // Unbiased integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace phlab
