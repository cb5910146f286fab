#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Every output
// block is a pure function of (counter, key), so streams can be generated in
// any order or in parallel with identical results.

#include <array>
#include <cstdint>

namespace fracspde {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key);

/// Uniform in the open interval (0, 1) from 52 random bits (exactly representable midpoints).
double uniform_open(std::uint32_t hi, std::uint32_t lo);

/// Standard normal draw from one Philox block (Box-Muller on both 64-bit halves).
double standard_normal(const PhiloxCounter& block);

/// splitmix64 finalizer; used to derive independent seeds (replicates, sub-streams).
std::uint64_t mix64(std::uint64_t x);

/// Seed of replicate r of a run seeded with seed.
std::uint64_t replicate_seed(std::uint64_t seed, std::uint64_t r);

}  // namespace fracspde
