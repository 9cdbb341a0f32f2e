#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace fedunlearn {

// Every random draw in the library goes through these helpers rather than
// <random> distributions, whose bit streams are implementation-defined.
// mt19937_64 itself is fully specified by the standard, so seeded results
// are reproducible across compilers and platforms.

/// SplitMix64 finalizer.
uint64_t splitmix64(uint64_t x);

/// Derive an independent stream seed from (seed, index). Used for per-trial,
/// per-round and per-client sub-seeds: mix_seed(s, i) = splitmix64(s + GOLDEN * (i + 1))
/// with GOLDEN = 0x9E3779B97F4A7C15.
uint64_t mix_seed(uint64_t seed, uint64_t index);

/// Uniform double in [0, 1) with 53 random bits.
double uniform_unit(std::mt19937_64& rng);

/// Uniform double in [lo, hi).
double uniform_range(std::mt19937_64& rng, double lo, double hi);

/// Unbiased uniform integer in [0, n), n >= 1. Rejection sampling.
uint64_t uniform_below(std::mt19937_64& rng, uint64_t n);

/// Standard normal via Box-Muller (one value per call).
double gaussian(std::mt19937_64& rng);

/// Fisher-Yates permutation of 0..n-1.
std::vector<size_t> random_permutation(std::mt19937_64& rng, size_t n);

}  // namespace fedunlearn
