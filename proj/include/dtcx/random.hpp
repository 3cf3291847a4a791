#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace dtcx {

// All randomness goes through std::mt19937_64 plus these helpers, which
// avoid the implementation-defined std:: distributions so that streams are
// reproducible across standard libraries.
using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent substream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return Rng(mix_seed(seed, stream));
}

// Uniform double in [0, 1) with 53 random bits.
double uniform01(Rng& rng) noexcept;

// Uniform integer in [0, bound); bound must be > 0.
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) noexcept;

// Standard normal via Box-Muller (one value per call).
double standard_normal(Rng& rng) noexcept;

template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

std::vector<std::size_t> permutation(std::size_t n, Rng& rng);

}  // namespace dtcx
