#pragma once

#include <cmath>
#include <cstdint>

namespace replaymod {

// Seeded 64-bit PRNG (splitmix64 finalizer). All stochastic behaviour in the
// toolkit flows through this generator so runs are reproducible bit-for-bit
// across platforms; the update and output functions are frozen in README.md.
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double next_range(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Standard normal via Box-Muller. Draws two uniforms per pair and caches
    // the sine branch, so the output sequence is a pure function of the seed.
    double next_gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = next_double();
        double u2 = next_double();
        // Guard against log(0); pushes u1 to the smallest representable draw.
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.14159265358979323846 * u2;
        cached_ = radius * std::sin(angle);
        have_cached_ = true;
        return radius * std::cos(angle);
    }

    // Derives an independent stream for substream `index`; used to give each
    // corpus utterance its own seed.
    static uint64_t derive(uint64_t seed, uint64_t index) {
        SplitMix64 mix(seed ^ (0xA5A5A5A55A5A5A5AULL + index * 0x9E3779B97F4A7C15ULL));
        return mix.next_u64();
    }

private:
    uint64_t state_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace replaymod
