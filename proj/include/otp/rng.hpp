#pragma once

#include <cstdint>

namespace otp {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based generator. The output stream is a pure function of the key,
/// and `derive` splits off independent child streams, so a draw keyed by
/// (seed, episode, ...) never depends on how many draws other streams made.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : key_(mix64(seed ^ 0x6a09e667f3bcc908ULL)) {}

    Rng derive(std::uint64_t tag) const {
        Rng child(0);
        child.key_ = mix64(key_ ^ mix64(tag + 0xa54ff53a5f1d36f1ULL));
        return child;
    }

    std::uint64_t next_u64() { return mix64(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_open_low() { return 1.0 - uniform(); }

    /// Standard normal via Box-Muller (one variate per call, no caching).
    double normal();

    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace otp
