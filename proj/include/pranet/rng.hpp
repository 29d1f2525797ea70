#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pranet {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// mt19937_64 with hand-rolled value mappings. The engine's output sequence is
// fixed by the standard, and avoiding std::uniform_*_distribution (whose
// mapping is implementation-defined) keeps every seeded stream bit-identical
// across compilers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n); modulo bias is irrelevant at the ranges used here
    std::uint64_t below(std::uint64_t n) { return engine_() % n; }

    // standard normal, Box-Muller, one value per call (the sine twin is discarded
    // so that each draw consumes a fixed number of engine steps)
    double gaussian() {
        const double two_pi = 6.283185307179586476925286766559;
        double u1 = static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace pranet
