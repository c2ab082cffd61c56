#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rankcom::rng {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed of the named substream. All randomness in the project flows from a
/// single user seed through these, so components are reproducible in
/// isolation and independent of scheduling.
inline std::uint64_t stream_seed(std::uint64_t seed, std::string_view name, std::uint64_t index = 0) {
  return splitmix64(splitmix64(seed ^ fnv1a(name)) ^ index);
}

inline std::mt19937_64 make_stream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0) {
  return std::mt19937_64(stream_seed(seed, name, index));
}

/// Counter-based per-pair stream: sampling a pair (i,j) does not depend on
/// how pairs are scheduled across threads.
inline std::mt19937_64 pair_stream(std::uint64_t seed, std::uint64_t i, std::uint64_t j) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64((i << 32) ^ j)));
}

}  // namespace rankcom::rng
