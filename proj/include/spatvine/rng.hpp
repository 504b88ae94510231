// Counter-based random generator. Every draw is a pure function of
// (seed, stream, counter), so parallel and serial execution orders produce
// identical values.
#pragma once

#include <cstdint>

namespace spatvine {

namespace detail {
inline uint64_t mix64(uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}
}  // namespace detail

class CounterRng {
public:
  explicit CounterRng(uint64_t seed, uint64_t stream = 0)
      : key_(detail::mix64(seed + 0x9E3779B97F4A7C15ULL * (stream + 1))) {}

  uint64_t bits(uint64_t counter) const {
    return detail::mix64(key_ + 0x9E3779B97F4A7C15ULL * (counter + 1));
  }

  // Uniform draw strictly inside (0, 1).
  double uniform(uint64_t counter) const {
    return (bits(counter) >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

  // Standard normal via inverse transform (defined in bicop users through
  // stats.hpp); kept here as bits/uniform only to avoid a dependency cycle.

private:
  uint64_t key_;
};

}  // namespace spatvine
