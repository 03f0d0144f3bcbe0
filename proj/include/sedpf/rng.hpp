#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sedpf {

// Deterministic RNG used everywhere randomness is needed. All derived
// draws (uniform doubles, normals, bytes) are implemented explicitly on
// top of the mt19937_64 stream so a given seed yields the same sequence
// on every platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t u64() { return eng_(); }

    std::uint8_t byte() { return static_cast<std::uint8_t>(u64() & 0xFF); }

    // Uniform in [0, 1).
    double uniform01() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1]; safe for log().
    double uniform01_open() {
        return (static_cast<double>(u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Box-Muller; caches the spare deviate.
    double normal(double mean, double stddev) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + stddev * spare_;
        }
        double u1 = uniform01_open();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double z0 = r * std::cos(2.0 * M_PI * u2);
        spare_ = r * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return mean + stddev * z0;
    }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return n ? u64() % n : 0; }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// splitmix64: cheap stateless mixer for deriving per-stream seeds from a
// master seed without correlated streams.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace sedpf
