#pragma once

// Deterministic random numbers for the synthetic data pipeline.
//
// std::mt19937_64 produces a standard-specified bit stream, but the standard
// distributions (<random>'s uniform_real_distribution etc.) are free to vary
// between library implementations. To keep generated scenes byte-identical
// across toolchains the transforms below are fixed here:
//   uniform01      (x >> 11) * 2^-53, in [0, 1)
//   normal         Box-Muller on two uniform01 draws (always consumes two)
//   uniform_int(n) rejection sampling, unbiased on [0, n)

#include <cstdint>
#include <random>

namespace wdlt {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  double normal(double mean = 0.0, double sigma = 1.0);

  // Unbiased integer in [0, n), n >= 1.
  std::uint64_t uniform_int(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace wdlt
