#pragma once

#include <cstdint>

namespace edmc {

/// Counter-based pseudo-random generator.
///
/// Every variate is a pure function of (seed, counter): the counter is mixed
/// through two rounds of the splitmix64 finalizer. This makes sampling
/// order-independent and trivially replayable — algorithm id "splitmix64-ctr/2".
inline constexpr const char* kRngAlgorithmId = "splitmix64-ctr/2";

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t counter_random(std::uint64_t seed, std::uint64_t counter) {
    return mix64(mix64(seed) ^ mix64(counter));
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::uint64_t seed, std::uint64_t counter) {
    return static_cast<double>(counter_random(seed, counter) >> 11) * 0x1.0p-53;
}

/// Fixed mixer for deriving per-trial seeds from a master seed, so trials are
/// independent and can run in any order.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
    return mix64(master_seed ^ mix64(index + 0x51ED270B0A1ULL));
}

}  // namespace edmc
