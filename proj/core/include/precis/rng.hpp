#pragma once

#include <cstdint>

namespace precis {

// SplitMix64 stream. Normal draws go through the inverse CDF so that output
// is bit-identical across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // uniform on the open interval (0,1)
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_normal();

  // integer in [0, bound)
  std::uint64_t next_below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

// Deterministic derivation of per-replicate / per-purpose seeds from a master
// seed. Distinct (index, salt) pairs give independent-looking streams.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index, std::uint64_t salt = 0);

}  // namespace precis
