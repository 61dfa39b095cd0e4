#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>

#include "gcomp/errors.hpp"

namespace gcomp {

// Counter-seeded xoshiro256++ generator with explicit distribution code.
// Every random draw in the project goes through this type so that results
// are reproducible bit-for-bit for a fixed master seed, independent of the
// platform's <random> implementation and of the worker count (streams are
// keyed by logical index, never by thread id).

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
        if (state_[0] == 0 && state_[1] == 0 && state_[2] == 0 && state_[3] == 0)
            state_[0] = 1;
    }

    /// Derive an independent stream from a master seed and a tag path,
    /// e.g. Rng::stream(master, {kReplicate, r}) for replicate r.
    static Rng stream(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
        std::uint64_t sm = master;
        std::uint64_t mixed = splitmix64(sm);
        for (std::uint64_t t : tags) {
            sm ^= t + 0x9E3779B97F4A7C15ULL + (sm << 6) + (sm >> 2);
            mixed ^= splitmix64(sm);
        }
        return Rng(mixed);
    }

    std::uint64_t u64() {
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

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) throw InputError("uniform_int: n must be positive");
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t r = u64();
            if (r >= threshold) return r % n;
        }
    }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Standard normal via Marsaglia polar method (second value discarded).
    double normal() {
        for (;;) {
            double u = 2.0 * uniform01() - 1.0;
            double v = 2.0 * uniform01() - 1.0;
            double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    /// Poisson by inversion (sequential search). Exact for the mean range
    /// used here; guards against underflow of exp(-mu) for huge means.
    long poisson(double mu) {
        if (!(mu >= 0.0)) throw InputError("poisson: mean must be nonnegative");
        if (mu == 0.0) return 0;
        if (mu > 600.0) throw InputError("poisson: mean too large for inversion sampler");
        double p = std::exp(-mu);
        double cum = p;
        double u = uniform01();
        long k = 0;
        while (u > cum && k < 100000) {
            ++k;
            p *= mu / static_cast<double>(k);
            cum += p;
        }
        return k;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<std::uint64_t, 4> state_;
};

// Stream tag namespaces. Keeping them distinct guarantees that the dataset,
// trajectory, and bootstrap streams never collide for one master seed.
namespace stream_tag {
inline constexpr std::uint64_t dataset = 0xD5E1;
inline constexpr std::uint64_t trajectory = 0x7A91;
inline constexpr std::uint64_t bootstrap = 0xB007;
inline constexpr std::uint64_t replicate = 0x5EED;
inline constexpr std::uint64_t oracle = 0x0AC1;
inline constexpr std::uint64_t init = 0x1417;
}  // namespace stream_tag

}  // namespace gcomp
