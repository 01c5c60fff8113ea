#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace wdde {

// splitmix64 output function (Steele, Lea & Flood).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed of stream `index` under `root`.
///
/// Counter based: the result depends only on (root, index), so replicate
/// streams can be created in any order and on any worker.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) noexcept
{
    return mix64(root ^ mix64(index ^ 0xD1B54A32D192ED03ULL));
}

/// Two-level split, e.g. (grid point, replicate).
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b) noexcept
{
    return derive_seed(derive_seed(root, a), b);
}

/// xoshiro256** seeded from a single 64-bit value through splitmix64.
/// Satisfies UniformRandomBitGenerator.
class Rng
{
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) noexcept
    {
        std::uint64_t s = seed;
        for (auto& w : state_) {
            w = mix64(s);
            s += 0x9E3779B97F4A7C15ULL;
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    double normal() { return normal_(*this); }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept
    {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace wdde
