#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace psr {

// Seeded generator with platform-independent output: the engine is
// fully specified by the standard and the variate transforms below are
// written out instead of relying on the library's distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}

    // SplitMix64 finalizer; also used to derive independent sub-seeds.
    static constexpr std::uint64_t mix(std::uint64_t x) noexcept {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    static constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) noexcept {
        return mix(seed ^ mix(stream + 0x632BE59BD9B4E019ULL));
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) noexcept {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    }

    // Standard normal via Box-Muller (one variate per call).
    double normal() noexcept {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace psr
