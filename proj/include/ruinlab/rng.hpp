#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace ruinlab {

// SplitMix64 (Steele/Lea/Flood; Vigna's fixed-increment variant). Used only
// to derive per-replication states, never as the sampling generator.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += UINT64_C(0x9E3779B97F4A7C15));
        z = (z ^ (z >> 30)) * UINT64_C(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)) * UINT64_C(0x94D049BB133111EB);
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

// xoshiro256++ by Blackman and Vigna. One instance per replication; the
// 256-bit state is expanded from (seed, stream) with SplitMix64, which is the
// seeding scheme recommended by the authors.
class Xoshiro256pp {
public:
    Xoshiro256pp() : Xoshiro256pp(0, 0) {}

    Xoshiro256pp(std::uint64_t seed, std::uint64_t stream) {
        SplitMix64 sm(seed ^ (UINT64_C(0x9E3779B97F4A7C15) * (stream + 1)));
        for (auto& w : s_) w = sm.next();
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform double in [0, 1), 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Unit-mean exponential via inversion; -log1p(-u) never sees log(0).
    double exponential() { return -std::log1p(-uniform01()); }

    // Box-Muller without caching: every call consumes exactly two uniforms,
    // so the draw sequence is independent of caller interleaving.
    double normal() {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return r * std::cos(6.283185307179586476925286766559 * u2);
    }

    // Gamma(shape, 1) by Marsaglia-Tsang squeeze; requires shape >= 1.
    double gamma(double shape) {
        if (!(shape >= 1.0)) throw std::domain_error("gamma: shape must be >= 1");
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform01();
            const double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

// Stream contract used throughout: replication i of a run seeded with `seed`
// draws from Xoshiro256pp(seed, i). Parallel and serial execution therefore
// produce identical samples.
inline Xoshiro256pp replication_stream(std::uint64_t seed, std::uint64_t replication) {
    return Xoshiro256pp(seed, replication);
}

}  // namespace ruinlab
