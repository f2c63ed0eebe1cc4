#pragma once

// Deterministic sampling. SplitMix64 plus explicit uniform/gaussian mappings
// so results are reproducible across runs and independent of the standard
// library's distribution implementations. Per-index substreams make parallel
// sweeps schedule-independent.

#include <cmath>
#include <cstdint>

#include "errb/numerics.hpp"

namespace errb {

struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * u01(); }
};

// Independent substream for sample index i; the derived state depends only on
// (seed, i), never on evaluation order.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 s(seed ^ (0x632BE59BD9B4E019ULL * (index + 1)));
    s.next();
    s.next();
    return s;
}

inline double gaussian(SplitMix64& rng) {
    // Box-Muller; u1 kept away from 0.
    double u1 = rng.u01();
    double u2 = rng.u01();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

inline Vec gaussian_vec(SplitMix64& rng, std::size_t m) {
    Vec v(m);
    for (auto& x : v) x = gaussian(rng);
    return v;
}

inline Vec sphere_direction(SplitMix64& rng, std::size_t m) {
    for (;;) {
        Vec v = gaussian_vec(rng, m);
        double n = norm2(v);
        if (n > 1e-12) return scale(v, 1.0 / n);
    }
}

// uniform in the Euclidean ball of the given radius
inline Vec ball_point(SplitMix64& rng, std::size_t m, double radius) {
    Vec d = sphere_direction(rng, m);
    double r = radius * std::pow(rng.u01(), 1.0 / static_cast<double>(m));
    return scale(d, r);
}

// uniform in [-halfwidth, halfwidth]^m
inline Vec box_point(SplitMix64& rng, std::size_t m, double halfwidth) {
    Vec v(m);
    for (auto& x : v) x = rng.uniform(-halfwidth, halfwidth);
    return v;
}

} // namespace errb
