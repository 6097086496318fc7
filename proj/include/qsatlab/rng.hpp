#pragma once

// Seeded random streams. Every stream in the library is an std::mt19937_64
// seeded through a splitmix64 derivation, and every distribution is written
// out here so the same seed produces the same numbers on any conforming
// platform (the std:: distributions are implementation-defined).

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace qsat {

using u128 = unsigned __int128;

/// splitmix64 output function applied to `z`.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Child seed for stream `index` under `seed`:
///   splitmix64_mix(seed + 0x9e3779b97f4a7c15 * (index + 1)).
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::uint64_t index) noexcept {
  return splitmix64_mix(seed + 0x9e3779b97f4a7c15ULL * (index + 1));
}

/// Folds derive_seed over a path, e.g. {alpha_index, trial, purpose}.
constexpr std::uint64_t derive_seed(
    std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept {
  for (auto i : path) seed = derive_seed(seed, i);
  return seed;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }

  /// Standard normal (Box-Muller, second variate cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Uniform integer in [0, bound); bound > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = -bound % bound;  // 2^64 mod bound
    for (;;) {
      const std::uint64_t x = next();
      if (x >= limit) return x % bound;
    }
  }

  /// Uniform 128-bit integer in [0, bound); bound > 0.
  u128 below(u128 bound) {
    if (bound <= static_cast<u128>(UINT64_MAX)) {
      return below(static_cast<std::uint64_t>(bound));
    }
    const u128 limit = (-bound) % bound;
    for (;;) {
      const u128 x = (static_cast<u128>(next()) << 64) | next();
      if (x >= limit) return x % bound;
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace qsat
