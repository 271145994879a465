#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace phychal {

using rng_t = std::mt19937_64;

// One splitmix64 step: mixes the input into a well-distributed 64-bit value.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Per-trial seed: order-independent across threads because it depends only on
// the coordinates, never on call order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t experiment_id,
                                 std::uint64_t sweep_index, std::uint64_t trial_index) {
    std::uint64_t s = splitmix64(master);
    s = splitmix64(s ^ experiment_id);
    s = splitmix64(s ^ sweep_index);
    return splitmix64(s ^ trial_index);
}

inline rng_t make_trial_rng(std::uint64_t master, std::uint64_t experiment_id,
                            std::uint64_t sweep_index, std::uint64_t trial_index) {
    return rng_t(derive_seed(master, experiment_id, sweep_index, trial_index));
}

// Uniform double in [0, 1) from the top 53 bits. The std:: distributions are
// implementation-defined; these primitives keep every sampled stream identical
// across standard libraries for a given engine state.
inline double u01(rng_t& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform double in (0, 1]; safe as a log() argument.
inline double u01_positive(rng_t& rng) {
    return 1.0 - u01(rng);
}

// Marsaglia polar method; returns one N(0,1) variate per call, caching none
// (stateless by design so per-trial streams stay position-independent).
inline double sample_normal(rng_t& rng) {
    for (;;) {
        const double a = 2.0 * u01(rng) - 1.0;
        const double b = 2.0 * u01(rng) - 1.0;
        const double r2 = a * a + b * b;
        if (r2 > 0.0 && r2 < 1.0)
            return a * std::sqrt(-2.0 * std::log(r2) / r2);
    }
}

// Unbiased integer in [0, bound) by rejection on the high bits.
inline std::uint64_t sample_below(rng_t& rng, std::uint64_t bound) {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    for (;;) {
        const std::uint64_t v = rng();
        if (v < limit) return v % bound;
    }
}

} // namespace phychal
