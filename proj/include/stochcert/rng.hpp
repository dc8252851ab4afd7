// Deterministic, platform-independent random number generation.
//
// SplitMix64 (Steele/Lea/Flood 2014): a 64-bit counter advanced by the golden
// gamma and passed through an avalanche finalizer. Chosen because the whole
// algorithm fits on one screen, uses only uint64 ops (bit-identical output on
// every platform), and supports cheap derivation of independent per-path
// streams without sharing mutable state.

#pragma once

#include <cstdint>

namespace stochcert {

struct SplitMix64 {
    std::uint64_t state = 0;

    SplitMix64() = default;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        return mix(state);
    }

    // Uniform double in [0,1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Independent stream for (seed, index). The index is avalanche-mixed
    // before combining so that consecutive indices do not yield shifted
    // copies of the same counter sequence.
    static SplitMix64 stream(std::uint64_t seed, std::uint64_t index) {
        return SplitMix64(mix(seed ^ mix(index * 0xD1342543DE82EF95ULL + 1)));
    }
};

}  // namespace stochcert
