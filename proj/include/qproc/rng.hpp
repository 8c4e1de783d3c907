#pragma once

#include <cmath>
#include <cstdint>

// Splittable deterministic generator (SplitMix64). A simulation is fully
// reproducible from (seed, stream): stream s derives an independent
// generator, so multi-path workloads shard paths across workers with
// per-path generators and the results do not depend on the worker count.

namespace qproc {

inline uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  static Rng for_stream(uint64_t seed, uint64_t stream) {
    return Rng(mix64(seed + 0x9E3779B97F4A7C15ULL * (stream + 1)));
  }

  uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  // uniform on [0, 1)
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  // uniform on (0, 1); safe under log and quantile endpoints
  double next_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // standard normal; Box-Muller, consumes exactly two variates
  double next_gaussian() {
    const double u1 = next_open();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.28318530717958647692 * u2);
  }

 private:
  uint64_t state_;
};

}  // namespace qproc
