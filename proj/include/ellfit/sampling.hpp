#pragma once

#include "ellfit/common.hpp"

#include <array>
#include <cstddef>
#include <cstdint>

namespace ellfit::sampling {

/// m Gaussian vectors in R^d, one per row, with entries ~ N(0, 1/d).
struct SampleSet {
  std::size_t d = 0;
  std::size_t m = 0;
  Matrix vectors;  // m x d
  std::uint64_t seed = 0;
};

/// Symmetric n x n matrix with zero diagonal and i.i.d. N(0, variance)
/// upper-triangle entries.
struct GoeMatrix {
  std::size_t n = 0;
  Matrix entries;
  std::uint64_t seed = 0;
};

// Stream identifiers keep independent draws from sharing counters.
inline constexpr std::uint64_t kVectorStream = 0x76656374ULL;
inline constexpr std::uint64_t kGoeStream = 0x676f6521ULL;
inline constexpr std::uint64_t kProbeStream = 0x70726f62ULL;

/// Philox4x32-10 counter-based generator: the block at (key, counter) is a
/// pure function of its inputs, so draws are independent of generation order.
struct Philox4x32 {
  using Block = std::array<std::uint32_t, 4>;
  static Block generate(std::uint64_t key, std::uint64_t counter_hi, std::uint64_t counter_lo);
};

/// Standard normal keyed by (seed, stream, index). Uses the Box-Muller
/// transform on two 53-bit uniforms from one Philox block; even and odd
/// indices share a block and take the cosine and sine branch respectively.
double standard_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

/// SplitMix64 finalizer; used to derive per-trial seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seed for trial `index` of an experiment seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

SampleSet sample_vectors(std::uint64_t seed, std::size_t d, std::size_t m);

GoeMatrix sample_goe(std::uint64_t seed, std::size_t n, double variance);

/// Wraps explicit rows (used for synthetic inputs). Seed is recorded as 0.
SampleSet from_rows(const Matrix& rows);

/// Seeded unit-norm probe vector for iterative eigensolvers.
Vector probe_vector(std::uint64_t seed, std::size_t n);

}  // namespace ellfit::sampling
