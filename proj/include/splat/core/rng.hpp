#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace splat {

// Seeded RNG with hand-rolled distributions. std::uniform_real_distribution
// and friends are not bit-stable across standard libraries; mt19937_64's raw
// stream is, so every run artifact stays reproducible for a given seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // [0, 1)
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // inclusive bounds
    int uniform_int(int lo, int hi) {
        int span = hi - lo + 1;
        int v = lo + static_cast<int>(uniform() * span);
        return v > hi ? hi : v;
    }

    // Box-Muller; draws two uniforms per call, no cached second value so the
    // stream position is a simple function of call count.
    double normal() {
        double u1 = 1.0 - uniform(); // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

} // namespace splat
