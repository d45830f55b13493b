#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

// Deterministic random numbers. std::mt19937_64 is bit-exact across
// implementations, but the standard distributions are not, so the variate
// transforms live here. splitmix64 turns (seed, stream index) pairs into
// independent engine seeds; generation order is then per-stream, which keeps
// parallel data generation independent of thread count and schedule.

namespace sigreg {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Seed for substream `stream` of a master seed. Chains, so
// split_seed(split_seed(s, a), b) gives a two-level hierarchy.
constexpr std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller (cosine branch only, so each call
    // consumes exactly two engine draws and streams stay aligned). u1 is
    // taken on bin midpoints so it is never 0 and log() stays finite.
    double normal() {
        double u1 = (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace sigreg
