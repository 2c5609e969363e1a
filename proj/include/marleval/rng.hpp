#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace marleval::rng {

// splitmix64 finalizer. Bijective 64-bit mix with good avalanche behaviour;
// the basis of both key derivation and the draw streams below.
inline std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Derives the 64-bit key of a named substream from a base seed, a text label
// and up to three integer coordinates (task index, replicate index, ...).
// Every randomised operation in the toolkit keys its streams through this
// function, which is what makes results reproducible for a given seed: the
// draws consumed for one coordinate do not depend on evaluation order.
inline std::uint64_t deriveKey(std::uint64_t seed, std::string_view label,
                               std::uint64_t a = 0, std::uint64_t b = 0,
                               std::uint64_t c = 0) noexcept {
    std::uint64_t h = mix(seed ^ fnv1a(label));
    h = mix(h ^ (a + 0x9e3779b97f4a7c15ULL));
    h = mix(h ^ (b + 0x9e3779b97f4a7c15ULL));
    h = mix(h ^ (c + 0x9e3779b97f4a7c15ULL));
    return h;
}

// Counter-based splitmix64 stream. Cheap to construct, so callers create one
// per (label, coordinates) key instead of sharing mutable state.
class Stream {
public:
    explicit Stream(std::uint64_t key) noexcept : state_(key) {}

    std::uint64_t next() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    // Uniform double in [0, 1), 53 random bits.
    double nextUnit() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n) via 128-bit multiply (no modulo bias worth
    // caring about at bootstrap sample sizes, and fully deterministic).
    std::size_t nextBelow(std::size_t n) noexcept {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    // Standard normal via Box-Muller. The library intentionally avoids
    // std::normal_distribution: its output differs across standard-library
    // implementations, and frozen test values require one fixed sequence.
    double nextGaussian() noexcept {
        double u1 = nextUnit();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = nextUnit();
        const double two_pi = 6.28318530717958647692528676655900577;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

private:
    std::uint64_t state_;
};

}  // namespace marleval::rng
