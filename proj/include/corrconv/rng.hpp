#pragma once

#include <cmath>
#include <cstdint>

namespace corrconv {

/// SplitMix64 finalizer. Used both for seed expansion and for deriving
/// independent per-trial seeds from (master_seed, index).
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Fixed seed-derivation scheme: stream `index` under `base` gets
/// splitmix64(base + GOLDEN * (index + 1)). Trial t of an experiment uses
/// derive_seed(master_seed, t); sub-streams (graph, features, solver) are
/// derived from the trial seed the same way.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return splitmix64(base + 0x9E3779B97F4A7C15ULL * (index + 1));
}

/// xoshiro256++ with splitmix64 seeding. Self-contained so that sampled
/// graphs and features are bit-identical across standard libraries.
class Xoshiro256pp {
public:
    explicit Xoshiro256pp(std::uint64_t seed = 0) {
        std::uint64_t z = seed;
        for (auto& word : state_) {
            z = splitmix64(z);
            word = z;
        }
        have_gauss_ = false;
        gauss_cache_ = 0.0;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; second value of each pair is cached.
    double gaussian() {
        if (have_gauss_) {
            have_gauss_ = false;
            return gauss_cache_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        gauss_cache_ = r * std::sin(theta);
        have_gauss_ = true;
        return r * std::cos(theta);
    }

    /// Uniform integer in [0, bound) by rejection; bound > 0.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
    bool have_gauss_;
    double gauss_cache_;
};

} // namespace corrconv
