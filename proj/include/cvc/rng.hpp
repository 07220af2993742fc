#pragma once

#include <cstdint>
#include <random>

namespace cvc {

/// Every random draw in the library comes from an engine keyed by
/// (run seed, phase, up to three indices), so results never depend on the
/// order in which independent pieces of work are executed.
enum class Phase : std::uint64_t {
  folds = 1,
  bootstrap = 2,
  data = 3,
  split = 4,
  coefficients = 5,
  replicate = 6,
};

using Engine = std::mt19937_64;

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t substream_seed(std::uint64_t seed, Phase phase,
                                       std::uint64_t a = 0, std::uint64_t b = 0,
                                       std::uint64_t c = 0) noexcept {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ static_cast<std::uint64_t>(phase));
  h = mix64(h ^ a);
  h = mix64(h ^ (b + 0x632be59bd9b4e019ULL));
  h = mix64(h ^ (c + 0x2545f4914f6cdd1dULL));
  return h;
}

inline Engine substream(std::uint64_t seed, Phase phase, std::uint64_t a = 0,
                        std::uint64_t b = 0, std::uint64_t c = 0) {
  return Engine(substream_seed(seed, phase, a, b, c));
}

}  // namespace cvc
