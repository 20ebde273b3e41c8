#pragma once

#include <cstdint>
#include <random>

namespace trailblazer {

/// Counted, seedable random stream. Owned by exactly one planning run.
///
/// All randomness flows through u01() so runs reproduce bit-for-bit across
/// platforms: mt19937_64 output is pinned by the standard, and distributions
/// are hand-rolled because the standard library ones are not portable.
class rng_stream {
  public:
    explicit rng_stream(std::uint64_t seed) : engine_(mix(seed)) {}

    /// Uniform double in [0, 1) with 53 random bits.
    double u01() {
        ++draws_;
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return u01() < p; }

    /// Number of u01 draws so far. Used to tag states drawn from a continuum,
    /// so two draws never compare equal even if the coordinates collide.
    std::uint64_t draws() const { return draws_; }

  private:
    // splitmix64 finalizer; keeps nearby seeds from producing correlated
    // mt19937_64 states.
    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    std::mt19937_64 engine_;
    std::uint64_t draws_ = 0;
};

}  // namespace trailblazer
