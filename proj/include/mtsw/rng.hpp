#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace mtsw {

/// SplitMix64 step. Used to expand seeds and to hash stream keys.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro256** generator. Satisfies UniformRandomBitGenerator.
///
/// Every random draw in the library goes through the helpers below
/// (uniform_below, uniform01, ...) rather than <random> distributions, whose
/// output is implementation-defined. Results are therefore bit-identical
/// across standard libraries for a given seed.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) noexcept { reseed(seed); }

  void reseed(std::uint64_t seed) noexcept {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = std::rotl(s_[3], 45);
    return result;
  }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  std::array<std::uint64_t, 4> s_{};
};

/// Derives an independent generator from a master seed and a path of
/// integer keys, e.g. (seed, cell, graph, trial). The same path always yields
/// the same stream, independent of the order in which streams are created.
inline Rng substream(std::uint64_t master_seed,
                     std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = master_seed;
  std::uint64_t acc = splitmix64(h);
  for (std::uint64_t key : keys) {
    std::uint64_t mix = acc ^ (key + 0x632be59bd9b4e019ULL);
    acc = splitmix64(mix);
  }
  return Rng{acc};
}

/// Uniform integer in [0, bound). Lemire's nearly-divisionless method.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) noexcept {
  unsigned __int128 m = static_cast<unsigned __int128>(rng()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(rng()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in (0, 1].
inline double uniform01_open_low(Rng& rng) noexcept {
  return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) noexcept { return uniform01(rng) < p; }

/// Number of failures before the first success of Bernoulli(p) trials.
/// Lets a sequence of independent Bernoulli(p) trials be sampled by jumping
/// directly between successes. Returns the max value when p == 0.
inline std::uint64_t geometric_skip(Rng& rng, double p) noexcept {
  constexpr auto kNever = std::numeric_limits<std::uint64_t>::max();
  if (p <= 0.0) return kNever;
  if (p >= 1.0) return 0;
  const double skip = std::floor(std::log(uniform01_open_low(rng)) / std::log1p(-p));
  if (!(skip < 1.8e19)) return kNever;
  return static_cast<std::uint64_t>(skip);
}

}  // namespace mtsw
