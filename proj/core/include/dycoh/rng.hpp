#pragma once

#include <cmath>
#include <cstdint>

namespace dycoh {

// Counter-based generator built on the splitmix64 finalizer. A stream is
// identified by up to four 64-bit keys mixed into the base seed; successive
// outputs hash an incrementing counter. Identical (seed, keys) sequences are
// reproducible regardless of evaluation order, which is what makes parallel
// generation deterministic.
struct counter_rng {
    uint64_t state;

    static uint64_t mix(uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    explicit counter_rng(uint64_t seed, uint64_t k0 = 0, uint64_t k1 = 0, uint64_t k2 = 0,
                         uint64_t k3 = 0) {
        uint64_t s = mix(seed);
        s = mix(s ^ mix(k0 + 0x1ull));
        s = mix(s ^ mix(k1 + 0x2ull));
        s = mix(s ^ mix(k2 + 0x3ull));
        s = mix(s ^ mix(k3 + 0x4ull));
        state = s;
    }

    uint64_t next_u64() {
        state += 0x9e3779b97f4a7c15ull;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Unbiased uniform integer in [0, n), n >= 1. Rejection sampling keeps the
    // draw exactly uniform for any n.
    uint64_t next_below(uint64_t n) {
        const uint64_t threshold = (0ull - n) % n; // 2^64 mod n
        for (;;) {
            const uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Standard normal via the Marsaglia polar method. Consumes a variable
    // number of uniforms; sequences stay deterministic for a fixed stream.
    double next_normal() {
        for (;;) {
            const double u = 2.0 * next_unit() - 1.0;
            const double v = 2.0 * next_unit() - 1.0;
            const double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }
};

} // namespace dycoh
