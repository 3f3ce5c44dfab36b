#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace ordino {

// SplitMix64 finalizer; used to derive decorrelated substreams from one seed.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t substream(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed ^ mix64(stream + 1));
}

// The std:: distributions are implementation-defined, so results would not be
// reproducible across standard libraries. We map the raw bits ourselves.
inline double unit_uniform(std::mt19937_64& rng) {  // [0, 1)
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * unit_uniform(rng);
}

inline double unit_exponential(std::mt19937_64& rng) {
  return -std::log1p(-unit_uniform(rng));
}

inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {  // [0, n)
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(rng()) * n) >> 64);
}

template <class T>
void shuffle_in_place(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(bounded(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace ordino
