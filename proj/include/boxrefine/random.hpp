#pragma once

#include <cmath>
#include <cstdint>

namespace boxrefine {

// Deterministic random streams: integer state transitions plus an explicit
// float mapping, so corpora are byte-identical across platforms and across
// parallel generation orders. Sub-streams are derived with mix_seed, never
// by sharing one generator.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1), 53-bit resolution.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    // Standard normal via Box-Muller (the cosine branch only, one draw per
    // pair of uniforms, so the stream layout is position-independent).
    double next_gaussian() {
        double u1 = next_unit();
        while (u1 <= 0.0) {
            u1 = next_unit();
        }
        const double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

private:
    std::uint64_t state_;
};

// Documented seed mixing: stream k of seed s starts at
// splitmix64_scramble(s + k * 0x9E3779B97F4A7C15). Derived streams do not
// collide with each other or with the parent for any practical k.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 rng(seed + stream * 0x9E3779B97F4A7C15ULL);
    return rng.next_u64();
}

}  // namespace boxrefine
