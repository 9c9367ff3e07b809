#pragma once

// Counter-derived random substreams. Every (seed, timestep, location,
// permutation) tuple maps to its own generator state, so results do not
// depend on how work is scheduled across threads.

#include <cstdint>
#include <limits>
#include <span>
#include <utility>

namespace stlisa {

/// SplitMix64; satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Uniform integer in [0, bound) by Lemire's multiply-and-reject method.
/// Platform independent, unlike std::uniform_int_distribution.
inline std::uint64_t uniform_below(SplitMix64& rng, std::uint64_t bound) {
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

/// Fisher-Yates over the whole span.
template <typename T>
void shuffle(std::span<T> values, SplitMix64& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(values[i - 1], values[j]);
  }
}

/// First `k` steps of a forward Fisher-Yates: values[0..k) become a uniform
/// ordered sample without replacement. Returns the swap targets so the caller
/// can undo the shuffle.
template <typename T>
void partial_shuffle(std::span<T> values, std::size_t k, SplitMix64& rng, std::span<std::size_t> swaps) {
  const std::size_t m = values.size();
  for (std::size_t s = 0; s < k; ++s) {
    const auto j = s + static_cast<std::size_t>(uniform_below(rng, m - s));
    swaps[s] = j;
    std::swap(values[s], values[j]);
  }
}

template <typename T>
void undo_partial_shuffle(std::span<T> values, std::size_t k, std::span<const std::size_t> swaps) {
  for (std::size_t s = k; s-- > 0;) std::swap(values[s], values[swaps[s]]);
}

struct RngPolicy {
  /// Location slot used for dataset-wide (global) statistics.
  static constexpr std::uint64_t kGlobal = std::numeric_limits<std::uint64_t>::max();

  std::uint64_t master_seed = 0;

  SplitMix64 substream(std::uint64_t timestep, std::uint64_t location, std::uint64_t permutation) const {
    std::uint64_t h = mix(master_seed ^ 0x6A09E667F3BCC909ULL);
    h = mix(h ^ timestep);
    h = mix(h ^ location);
    h = mix(h ^ permutation);
    return SplitMix64(h);
  }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }
};

}  // namespace stlisa
