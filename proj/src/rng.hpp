#pragma once

#include <cmath>
#include <cstdint>

namespace rpmkit {

// splitmix64; fixed stream so every seeded result is reproducible across
// platforms without depending on a library distribution.
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1), 53-bit mantissa
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // uniform in [0, n)
    uint64_t uniform_below(uint64_t n) { return n == 0 ? 0 : next() % n; }

    // uniform integer in [lo, hi] inclusive
    int64_t uniform_int(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(uniform_below(static_cast<uint64_t>(hi - lo + 1)));
    }

    double uniform_range(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller, one sample per call
    double gaussian() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0)
            u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

private:
    uint64_t state_;
};

// Substream seed for a (seed, K, restart) triple. Fixed arithmetic, no
// library involvement, so clustering is reproducible everywhere.
inline uint64_t substream_seed(uint64_t seed, uint64_t k, uint64_t restart) {
    return seed ^ (0x9E3779B97F4A7C15ULL * (k + 1)) ^ (0xC2B2AE3D27D4EB4FULL * (restart + 1));
}

} // namespace rpmkit
