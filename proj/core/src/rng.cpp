#include "precis/rng.hpp"

#include "precis/stats.hpp"

namespace precis {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

double Rng::next_normal() { return normal_quantile(next_uniform()); }

std::uint64_t Rng::next_below(std::uint64_t bound) {
  // multiply-shift; bias is negligible for bound << 2^64 and determinism is what matters
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
}

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index, std::uint64_t salt) {
  std::uint64_t x = master;
  x = mix64(x + 0x9E3779B97F4A7C15ull * (index + 1));
  x = mix64(x + 0xD1B54A32D192ED03ull * (salt + 1));
  x = mix64(x + master);
  return x;
}

}  // namespace precis
