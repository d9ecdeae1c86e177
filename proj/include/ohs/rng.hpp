#pragma once

#include <cstdint>
#include <random>

namespace ohs {

/// splitmix64 step; used to derive decorrelated substream seeds so that
/// concurrent replicates stay deterministic and order-independent.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic child seed for substream `stream_id` of `seed`. The same
/// pair always yields the same value, independent of draw order elsewhere.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t s = seed ^ (0xa0761d6478bd642fULL * (stream_id + 1));
    const std::uint64_t a = splitmix64(s);
    const std::uint64_t b = splitmix64(s);
    return a ^ (b << 1);
}

/// Thin seeded wrapper around mt19937_64. All randomness in the library
/// flows from one root seed, split with substream() wherever work fans out.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    /// Independent child stream; does not consume state from this stream.
    Rng substream(std::uint64_t stream_id) const { return Rng(derive_seed(seed_, stream_id)); }

    std::uint64_t seed() const noexcept { return seed_; }

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }

    /// Uniform integer in [lo, hi] inclusive.
    long long uniform_int(long long lo, long long hi) {
        return std::uniform_int_distribution<long long>(lo, hi)(engine_);
    }

    double normal(double mu = 0.0, double sd = 1.0) {
        return mu + sd * std::normal_distribution<double>(0.0, 1.0)(engine_);
    }

    bool bernoulli(double p) { return uniform() < p; }

    std::mt19937_64& engine() { return engine_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace ohs
