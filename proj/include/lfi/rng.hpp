#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace lfi {

// xoshiro256++ with splitmix64 seeding. Hand-rolled so that streams are
// byte-reproducible across compilers and standard libraries, which the
// experiment harness relies on for deterministic parallel trials.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed = 0x9e3779b97f4a7c15ull) {
        std::uint64_t x = seed;
        for (auto& word : state_) word = splitmix64(x);
    }

    static RngStream from_state(std::uint64_t s0, std::uint64_t s1, std::uint64_t s2, std::uint64_t s3) {
        RngStream r;
        r.state_[0] = s0;
        r.state_[1] = s1;
        r.state_[2] = s2;
        r.state_[3] = s3;
        return r;
    }

    std::uint64_t next() {
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
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Standard normal via Box-Muller; the spare draw is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4] = {};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// FNV-1a hash of a label, used to separate experiment scopes.
inline std::uint64_t hash_label(std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

/// Counter-based derivation of an independent substream from
/// (master seed, scope label, trial index, strategy index).
inline RngStream derive_stream(std::uint64_t master_seed, std::string_view scope,
                               std::uint64_t trial, std::uint64_t strategy = 0) {
    std::uint64_t x = master_seed;
    std::uint64_t k = RngStream::splitmix64(x);
    x = k ^ hash_label(scope);
    k = RngStream::splitmix64(x);
    x = k ^ (trial * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull);
    k = RngStream::splitmix64(x);
    x = k ^ (strategy * 0xd1342543de82ef95ull + 1ull);
    RngStream::splitmix64(x);
    const std::uint64_t s0 = RngStream::splitmix64(x);
    const std::uint64_t s1 = RngStream::splitmix64(x);
    const std::uint64_t s2 = RngStream::splitmix64(x);
    const std::uint64_t s3 = RngStream::splitmix64(x);
    return RngStream::from_state(s0, s1, s2, s3);
}

}  // namespace lfi
