#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace msnet {

/// Named deterministic random stream: splitmix64 expands (seed ^ fnv1a64(label))
/// into xoshiro256++ state. Identical (seed, label) gives an identical sequence
/// regardless of platform, which is what dataset generation, parameter init and
/// dropout rely on for bit-for-bit reproducibility.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::string_view label);

    std::uint64_t next_u64();

    /// Uniform in [0,1) with 53 bits of mantissa.
    double next_double();

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t next_below(std::uint64_t n);

    /// Standard normal draw (Box-Muller, pair cached).
    double next_normal();

    static std::uint64_t fnv1a64(std::string_view s);
    static std::uint64_t splitmix64(std::uint64_t& state);

private:
    std::uint64_t state_[4];
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

/// Seeded Fisher-Yates permutation of {0, ..., n-1}.
std::vector<std::size_t> shuffled_indices(std::size_t n, RngStream& rng);

}  // namespace msnet
