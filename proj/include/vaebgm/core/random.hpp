#ifndef VAEBGM_CORE_RANDOM_HPP
#define VAEBGM_CORE_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <initializer_list>
#include <random>

namespace vaebgm {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; decorrelates structured seeds like (seed, epoch).
constexpr std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (const auto p : parts) {
        h = mix_seed(h ^ mix_seed(p));
    }
    return h;
}

inline Rng make_rng(std::initializer_list<std::uint64_t> parts) { return Rng{derive_seed(parts)}; }

/// Uniform in [0, 1). Built directly on the engine so results do not depend on
/// the standard library's distribution implementations.
inline double uniform01(Rng &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Box-Muller without caching, so every call consumes exactly two engine draws.
inline double standard_normal(Rng &rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) {
        u1 = uniform01(rng);
    }
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925 * u2);
}

/// Uniform integer in [0, n).
inline std::size_t uniform_index(Rng &rng, std::size_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t r = rng();
    while (r >= limit) {
        r = rng();
    }
    return static_cast<std::size_t>(r % n);
}

template <typename Container>
void shuffle_in_place(Container &c, Rng &rng) {
    for (std::size_t i = c.size(); i > 1; --i) {
        const std::size_t j = uniform_index(rng, i);
        using std::swap;
        swap(c[i - 1], c[j]);
    }
}

}  // namespace vaebgm

#endif
