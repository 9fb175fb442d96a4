#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace curricuforge {

// Pseudo-random stream with every algorithm pinned in this header, so derived
// artifacts never depend on the standard library's engine or distribution
// internals. splitmix64 core, Box-Muller gaussians without a cached spare,
// Fisher-Yates shuffling.
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next_u64() {
        state += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d49bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1), 53-bit resolution.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double next_range(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    double next_gaussian() {
        double u1 = next_unit();
        while (u1 == 0.0) u1 = next_unit();
        const double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    // Modulo bias is below 1/2^40 for the set sizes used here.
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[next_below(i)]);
        }
    }
};

// Decorrelates substreams drawn from one user-facing seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 0x632be59bd9b4e019ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d49bb133111ebull;
    return z ^ (z >> 31);
}

} // namespace curricuforge
