#pragma once

#include <cstdint>
#include <string_view>

namespace fedrf {

/// Deterministic splittable pseudorandom stream (splitmix64 core).
///
/// Every source of randomness in the simulator is an explicit Rng value, and
/// independent streams are derived with split() using stable labels (party
/// ids, node indices, sample indices).  This makes experiments reproducible
/// bit-for-bit regardless of execution order, including under the parallel
/// kernels.  Simulation-grade only; not a cryptographic generator.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  /// Uniform in [0, bound) via rejection sampling; bound must be > 0.
  uint64_t below(uint64_t bound) {
    uint64_t mask = bound - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    for (;;) {
      uint64_t v = next_u64() & mask;
      if (v < bound) return v;
    }
  }

  bool next_bool() { return (next_u64() >> 63) != 0; }

  /// Derives an independent child stream; the parent is not advanced, so
  /// the same (state, label) pair always yields the same child.
  Rng split(uint64_t label) const {
    uint64_t s = mix(state_ ^ 0xd1b54a32d192ed03ull);
    return Rng(mix(s + (label + 1) * 0x9e3779b97f4a7c15ull));
  }

  Rng split(std::string_view label) const { return split(fnv1a64(label)); }

  static uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
    return h;
  }

 private:
  static uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  uint64_t state_;
};

}  // namespace fedrf
