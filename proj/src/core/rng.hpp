#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace intentsim {

// Distinct deterministic RNG streams per subsystem keep one component's draws
// from perturbing another's, which is what makes whole runs replayable from a
// single scenario seed.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  return splitmix64(seed ^ splitmix64(salt));
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag, std::uint64_t salt = 0) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a over the tag
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return splitmix64(seed ^ splitmix64(h) ^ splitmix64(salt * 0x9e3779b97f4a7c15ULL + 1));
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::string_view tag, std::uint64_t salt = 0) {
  return std::mt19937_64{mix_seed(seed, tag, salt)};
}

}  // namespace intentsim
