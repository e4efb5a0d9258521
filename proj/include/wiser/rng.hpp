#pragma once

#include <cstdint>
#include <random>

namespace wiser {

using Rng = std::mt19937_64;

// SplitMix64 finalizer. Used both as a seed deriver and as the keyed hash
// behind pseudo-random watermark keys.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Independent child seed for substream `stream` of `base`.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
    return mix64(base ^ mix64(stream ^ 0xD1B54A32D192ED03ULL));
}

// Maps 64 random bits to a double strictly inside (0, 1).
constexpr double to_open_unit(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

inline double uniform_open(Rng& rng) { return to_open_unit(rng()); }

}  // namespace wiser
