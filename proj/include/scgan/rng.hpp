#ifndef SCGAN_RNG_HPP
#define SCGAN_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "scgan/common.hpp"

namespace scgan {

// ---------------------------------------------------------------------------
// Deterministic random number generation.
//
// All randomness in the project flows through named streams derived from a
// user seed. A stream is identified by a string key plus optional integer
// tags, so any consumer can re-derive exactly the generator it needs from
// (seed, key, tags...) without threading generator state through call sites.
// The generator is xoshiro256++, seeded via splitmix64; both have portable,
// fully specified output sequences, unlike the std <random> distributions.
// ---------------------------------------------------------------------------

constexpr std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

class Rng {
public:
    Rng() : Rng(0) {}

    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64_next(sm);
    }

    // Named substream: hash the key and tags into the seed material.
    static Rng stream(std::uint64_t seed, std::string_view key,
                      std::uint64_t tag0 = 0, std::uint64_t tag1 = 0,
                      std::uint64_t tag2 = 0) {
        std::uint64_t mix = seed;
        mix = splitmix64_next(mix) ^ fnv1a64(key);
        mix = splitmix64_next(mix) ^ tag0;
        mix = splitmix64_next(mix) ^ (tag1 * 0x9e3779b97f4a7c15ULL);
        mix = splitmix64_next(mix) ^ (tag2 * 0xc2b2ae3d27d4eb4fULL);
        return Rng(splitmix64_next(mix));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result =
            rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 bits of mantissa.
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). Rejection-free modulo is fine here: n is
    // always tiny relative to 2^64 so the bias is unobservable, and the
    // method is trivially portable.
    std::uint64_t uniform_index(std::uint64_t n) {
        SCGAN_CHECK(n > 0, ArgumentError, "uniform_index: n must be positive");
        return next_u64() % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller, no cached spare: each call consumes two uniforms. Slightly
    // wasteful but stateless beyond the engine words, which keeps stream
    // serialization trivial.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return r * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    double normal(double mean, double stddev) {
        return mean + stddev * normal();
    }

    // Fisher-Yates permutation of {0, ..., n-1}.
    template <typename Out>
    void permutation(std::size_t n, Out& out) {
        out.resize(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = i;
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(out[i - 1], out[j]);
        }
    }

    std::array<std::uint64_t, 4> state() const { return state_; }

    void set_state(const std::array<std::uint64_t, 4>& s) { state_ = s; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

} // namespace scgan

#endif
