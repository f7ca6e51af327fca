#pragma once

// Seeded PRNG for deterministic Monte Carlo simulation.
//
// xoshiro256++ core with splitmix64 seeding. Every stochastic component
// (update masks, additive noise, fixed-point drift) draws from its own
// stream derived from (seed, stream id), so the processes stay independent
// by construction and trajectories are reproducible bit-for-bit.

#include <array>
#include <cmath>
#include <cstdint>

namespace opfix {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    // Stream ids: 0 = update masks, 1 = additive noise, 2 = operator drift.
    static constexpr std::uint64_t kMaskStream = 0;
    static constexpr std::uint64_t kNoiseStream = 1;
    static constexpr std::uint64_t kDriftStream = 2;

    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
        std::uint64_t sm = seed ^ (0xD1B54A32D192ED03ULL * (stream + 1));
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t next_u64() {
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

    /// Uniform draw in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Standard normal via Box-Muller; consumes exactly two uniforms per draw.
    double normal() {
        const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    /// Weibull(shape, scale) by inverse CDF.
    double weibull(double shape, double scale) {
        const double u = 1.0 - uniform01();
        return scale * std::pow(-std::log(u), 1.0 / shape);
    }

private:
    static constexpr double kPi = 3.14159265358979323846;

    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_;
};

}  // namespace opfix
