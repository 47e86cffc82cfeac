#pragma once

#include <cstdint>
#include <random>

namespace cbg {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Child seed for an independent stream; streams derived from the same master
// seed with distinct indices never share state.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master ^ splitmix64(stream + 0x517cc1b727220a95ull));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace cbg
