#pragma once

#include <cstdint>

namespace nlsp {

/// Counter-based generator: the n-th draw depends only on (seed, stream, n),
/// so results do not depend on call order, thread, or platform.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

  std::uint64_t bits(std::uint64_t counter) const {
    return mix(mix(seed_ ^ mix(stream_ + 0x632be59bd9b4e019ULL)) + counter * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [-1, 1).
  double symmetric(std::uint64_t counter) const { return 2.0 * uniform(counter) - 1.0; }

  /// Sequential interface.
  double next_uniform() { return uniform(counter_++); }
  double next_symmetric() { return symmetric(counter_++); }

 private:
  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace nlsp
