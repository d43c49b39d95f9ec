#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <utility>
#include <vector>

namespace linkfp {

// Splittable 64-bit generator built on the SplitMix64 finalizer
// (Steele/Lea/Flood, "Fast splittable pseudorandom number generators").
// The state walks a Weyl sequence with the golden-ratio increment and every
// output passes through the murmur-style avalanche mix, so derived streams
// with distinct tags are statistically independent. All draws are exact
// integer/IEEE operations: a given seed reproduces the same sequence on any
// platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += kGamma;
        return mix(state_);
    }

    // Uniform in [0, 1) with 53 random mantissa bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Standard normal via Box-Muller. Always consumes exactly two uniforms
    // and keeps no spare, so the stream position stays predictable.
    double gaussian() {
        const double u1 = 1.0 - uniform();  // (0, 1]: keeps log() finite
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    // Child stream seeded from this stream; advances the parent by one draw.
    Rng split() { return Rng(next_u64()); }

    // Deterministic stream for a (seed, tag...) coordinate, independent of
    // any Rng instance. Used to give every (run, victim, trace) cell its own
    // stream.
    static std::uint64_t derive(std::uint64_t seed,
                                std::initializer_list<std::uint64_t> tags) {
        std::uint64_t h = mix(seed + kGamma);
        for (std::uint64_t t : tags) h = mix(h ^ mix(t + kGamma));
        return h;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

}  // namespace linkfp
