#pragma once

#include "tvnav/common.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace tvnav {

/// Deterministic random stream. std::mt19937_64 is bit-exact across
/// implementations, and normal deviates are produced by an explicit
/// Box-Muller transform on 53-bit uniforms, so a given seed yields the same
/// draws on every platform. distribution<> adaptors from the standard
/// library are avoided on purpose: their output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// splitmix64 round, used to derive independent substream seeds.
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) { return mix(mix(a) ^ b); }

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n) {
        // Rejection sampling keeps the distribution exact.
        const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
        std::uint64_t v = gen_();
        while (v >= limit) v = gen_();
        return v % n;
    }

    /// Standard normal deviate.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log1p(-u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    /// Two independent standard normals (one Box-Muller pair).
    Vec2 normal2() {
        has_spare_ = false;
        const double z0 = normal();
        const double z1 = normal();
        return Vec2(z0, z1);
    }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace tvnav
