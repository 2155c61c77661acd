// Deterministic named random streams.
//
// Every source of randomness in a scenario is a (root seed, stream name,
// index) triple, so one top-level seed reproduces every artifact byte for
// byte. Distributions are implemented here rather than taken from
// <random> because the standard leaves distribution sequences
// implementation-defined.
#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "ttrack/types.hpp"

namespace ttrack {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

class RngStream {
 public:
  RngStream(std::uint64_t root_seed, std::string_view name, std::uint64_t index = 0) {
    std::uint64_t state = root_seed ^ detail::fnv1a64(name);
    state ^= 0xa0761d6478bd642fULL * (index + 1);
    std::uint32_t words[8];
    for (auto& w : words) w = static_cast<std::uint32_t>(detail::splitmix64(state));
    std::seed_seq seq(std::begin(words), std::end(words));
    gen_.seed(seq);
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Multiply-shift map; bias is O(n / 2^64).
  std::uint64_t uniform_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(gen_()) * n) >> 64);
  }

  // Standard normal via Box-Muller; second value of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  Vec3 normal3(double sigma) { return Vec3(sigma * normal(), sigma * normal(), sigma * normal()); }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ttrack
