#pragma once

#include <cstdint>
#include <random>

namespace epsens::rng {

// Stateless splitmix64 step; used to derive decorrelated engine seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(a) ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2)));
}

// Independent, reproducible substream indexed by (seed, stream). Replicate r
// of a bootstrap or Monte Carlo run always draws from substream(seed, r),
// which makes results invariant to the degree of parallelism.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(splitmix64(mix(seed, stream)));
}

}  // namespace epsens::rng
