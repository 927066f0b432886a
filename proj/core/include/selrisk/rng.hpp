#pragma once

#include <cstdint>

#include "selrisk/normal.hpp"

namespace selrisk {

/// SplitMix64 finalizer: a stateless 64-bit mixing function.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derive an independent stream key from a base seed and up to two
/// coordinates (e.g. task index and permutation index, or replication
/// index).  Streams for distinct coordinates are statistically
/// independent and do not depend on evaluation order.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return mix64(seed ^ mix64(a ^ mix64(b)));
}

/// Counter-based generator: output n is a pure function of (key, n), so a
/// stream can be consumed from any thread or order with identical results.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : key_(key) {}

    std::uint64_t next_u64() { return mix64(key_ + 0x9E3779B97F4A7C15ULL * ++counter_); }

    /// Uniform double in the open interval (0, 1).
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound), bound >= 1.
    std::uint64_t next_below(std::uint64_t bound) {
        // Multiply-shift; bias is negligible for the small bounds used here.
        const unsigned __int128 wide =
            static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(bound);
        return static_cast<std::uint64_t>(wide >> 64);
    }

    /// Standard normal draw via the inverse CDF (deterministic per stream).
    double next_normal() { return normal_quantile(next_uniform()); }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace selrisk
