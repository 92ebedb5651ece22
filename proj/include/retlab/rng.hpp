#ifndef RETLAB_RNG_HPP
#define RETLAB_RNG_HPP

#include <cstdint>

namespace retlab {

namespace detail {

// SplitMix64 finalizer (Steele, Lea, Flood 2014). Full 64-bit avalanche.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

/// Counter-based pseudo-random generator: word i of a seeded stream is
/// addressable in O(1), so any prefix can be replayed or sampled out of
/// order without regenerating earlier words.
class counter_rng {
public:
    explicit counter_rng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    /// i-th 64-bit word of the stream, i = 0, 1, 2, ...
    std::uint64_t word(std::uint64_t i) const {
        return detail::mix64(seed_ + (i + 1) * 0x9e3779b97f4a7c15ULL);
    }

    /// Uniform integer in [0, bound) from word i; bias is at most
    /// bound / 2^64, negligible for every bound used here.
    std::uint64_t bounded(std::uint64_t i, std::uint64_t bound) const {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(word(i)) * bound) >> 64);
    }

    /// Uniform double in [0, 1) with 53 random bits from word i.
    double uniform01(std::uint64_t i) const {
        return static_cast<double>(word(i) >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t seed_;
};

/// Derive an independent sub-seed for a tagged task (per-seed experiments,
/// per-coordinate points). Deterministic in (seed, tag).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    return detail::mix64(seed ^ detail::mix64(tag + 0x51ed2701a3c5e491ULL));
}

} // namespace retlab

#endif
