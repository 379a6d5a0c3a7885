#pragma once

#include <cstdint>

namespace rpw {

// splitmix64. One word of state so snapshots can carry it verbatim; avoids
// the versioning hazards of <random> distribution objects.
struct SplitMix64 {
  uint64_t state = 0;

  explicit SplitMix64(uint64_t seed = 0) : state(seed) {}

  uint64_t next() {
    state += 0x9E3779B97F4A7C15ull;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // uniform in [0, n); n > 0. Modulo bias is ~2^-64 per draw, irrelevant here.
  uint64_t below(uint64_t n) { return next() % n; }

  // one draw per call regardless of p so draw sequences stay alignable
  bool bernoulli(double p) {
    uint64_t draw = next() >> 11;  // 53 bits
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return draw < static_cast<uint64_t>(p * 9007199254740992.0);  // p * 2^53
  }

  double canonical() { return (next() >> 11) * 0x1.0p-53; }
};

}  // namespace rpw
