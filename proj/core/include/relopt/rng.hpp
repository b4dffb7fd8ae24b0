#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace relopt {

// All randomness in the toolkit flows from one master seed. Independent
// work units (sample rows, MCMC chains, multistart points) draw from
// substreams derived by labeled hashing, so results do not depend on
// execution order or thread count.
uint64_t mix64(uint64_t x);
uint64_t derive_seed(uint64_t master, std::string_view label, uint64_t a = 0,
                     uint64_t b = 0, uint64_t c = 0);

// Deterministic across platforms: the engine sequence is pinned by the
// standard, and all variates are produced by inverse transform rather than
// the implementation-defined std distributions.
class RngStream {
 public:
  explicit RngStream(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Strictly inside (0, 1).
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double normal();

  // Unbiased-enough bounded integer in [0, n) via multiply-shift.
  uint64_t below(uint64_t n) {
    return static_cast<uint64_t>(
        (static_cast<__uint128_t>(next_u64()) * n) >> 64);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace relopt
