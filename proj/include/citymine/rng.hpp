// Deterministic random numbers. The engine is std::mt19937_64 (portable,
// fully specified); the distributions are written out by hand because the
// standard-library distribution objects are implementation-defined and
// would break byte-level reproducibility across toolchains.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace citymine {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). Modulo bias is irrelevant here; determinism is not.
    std::uint64_t bounded(std::uint64_t n) { return engine_() % n; }

    // Standard normal via Box-Muller, one cached value.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace citymine
