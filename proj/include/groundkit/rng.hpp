#pragma once

// Deterministic random source for simulations and property tests.
//
// std::mt19937_64 is fully specified by the standard, but the standard
// distributions are not, so every draw here goes through hand-rolled
// conversions. Same seed -> same sequence on every platform.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace groundkit::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1), 53 bits of entropy.
    double next_double() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + next_double() * (hi - lo);
    }

    /// Uniform index in [0, n). n must be positive.
    std::size_t uniform_index(std::size_t n) {
        if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(engine_()) * n) >> 64);
    }

    /// Uniform integer in [lo, hi], inclusive.
    int uniform_int(int lo, int hi) {
        if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
        auto span = static_cast<std::size_t>(static_cast<long long>(hi) - lo + 1);
        return lo + static_cast<int>(uniform_index(span));
    }

    bool bernoulli(double p) { return next_double() < p; }

    /// Box-Muller; deterministic because both uniforms come from this engine.
    double gaussian(double mean = 0.0, double stddev = 1.0) {
        double u1 = next_double();
        double u2 = next_double();
        if (u1 < 1e-300) u1 = 1e-300;
        double z = std::sqrt(-2.0 * std::log(u1)) *
                   std::cos(2.0 * 3.14159265358979323846 * u2);
        return mean + z * stddev;
    }

    /// Independent child stream. Children with distinct indices are
    /// decorrelated from each other and from the parent, so trials can
    /// run in parallel without sharing state.
    Rng split(std::uint64_t stream_index) const {
        std::uint64_t state = seed_ ^ (0xA0761D6478BD642FULL + stream_index * 0xE7037ED1A0B428DBULL);
        return Rng(splitmix64(state));
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

} // namespace groundkit::rng
