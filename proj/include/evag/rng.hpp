#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace evag {

// SplitMix64 finalizer. Used for all seed derivation so that streams for
// different (run, node, purpose) triples are decorrelated.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    return mix64(base ^ mix64(salt));
}

// Seeded random stream. The engine is std::mt19937_64 (bit-exact across
// platforms by the standard); the distribution helpers below are hand-rolled
// because the std distributions are implementation-defined and would break
// cross-toolchain reproducibility of runs.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(mix64(seed)) {}

    std::uint64_t next_u64() { return eng_(); }

    // [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // [lo, hi); degenerate bounds return lo.
    double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

    // Unbiased integer in [0, n) by rejection. n must be nonzero.
    std::uint64_t uniform_index(std::uint64_t n) {
        const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % n;
    }

    // Inclusive integer range.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(
                        uniform_index(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Standard normal via Box-Muller, second value cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    // Gap until the next success of a Bernoulli(p) sequence, i.e. the number
    // of failures before a success. Lets per-gene loops skip ahead instead of
    // drawing one uniform per gene.
    std::uint64_t geometric_skip(double p) {
        const double u = 1.0 - uniform01();  // (0, 1]
        return static_cast<std::uint64_t>(std::log(u) / std::log1p(-p));
    }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace evag
