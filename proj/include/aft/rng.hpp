#pragma once

#include <cstdint>

namespace aft {

// splitmix64 (Steele/Lea/Flood). All simulator randomness flows through this
// generator so traces replay identically across builds and ports.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [0, bound). bound must be > 0; modulo bias is irrelevant at
    // the pool sizes used here (< 2^32).
    std::uint64_t next_below(std::uint64_t bound) {
        return next_u64() % bound;
    }

private:
    std::uint64_t state_;
};

} // namespace aft
