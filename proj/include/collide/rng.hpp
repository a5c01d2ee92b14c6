#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace collide {

/// SplitMix64 finaliser; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// xoshiro256++ generator with the variate helpers the simulators need.
///
/// All variates are produced from raw 64-bit words by fixed arithmetic, so a
/// given seed yields the same stream on every platform and standard library
/// (std:: distributions are implementation-defined and are not used).
class RandomSource {
public:
    using result_type = std::uint64_t;

    explicit RandomSource(std::uint64_t seed = 0) noexcept {
        std::uint64_t z = seed;
        for (auto& w : state_) {
            w = mix64(z);
            z += 0x9E3779B97F4A7C15ULL;
        }
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_open0() noexcept {
        return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound), bound > 0 (Lemire's multiply-shift with rejection).
    std::uint64_t below(std::uint64_t bound) noexcept {
        __uint128_t m = static_cast<__uint128_t>((*this)()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<__uint128_t>((*this)()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Standard exponential variate.
    double exponential() noexcept { return -std::log(uniform_open0()); }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

/// Derives the random stream for one trial.
///
/// The stream seed is mix64(mix64(master) ^ mix64(index + 0x632BE59BD9B4E019)),
/// expanded to 256 bits of xoshiro state by SplitMix64. Both mixes are
/// bijections, so distinct indices under one master seed give distinct seeds.
inline RandomSource stream_split(std::uint64_t master_seed, std::uint64_t trial_index) noexcept {
    return RandomSource(mix64(mix64(master_seed) ^ mix64(trial_index + 0x632BE59BD9B4E019ULL)));
}

}  // namespace collide
