#include "ellfit/sampling.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ellfit::sampling {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53U;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57U;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9U;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85U;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(p);
  hi = static_cast<std::uint32_t>(p >> 32);
}

// 53-bit uniform in (0, 1]; never returns 0 so log() is finite.
inline double to_unit_open(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Block Philox4x32::generate(std::uint64_t key, std::uint64_t counter_hi,
                                       std::uint64_t counter_lo) {
  Block c{static_cast<std::uint32_t>(counter_lo), static_cast<std::uint32_t>(counter_lo >> 32),
          static_cast<std::uint32_t>(counter_hi), static_cast<std::uint32_t>(counter_hi >> 32)};
  std::uint32_t k0 = static_cast<std::uint32_t>(key);
  std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
  for (int round = 0; round < 10; ++round) {
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kPhiloxM0, c[0], lo0, hi0);
    mulhilo(kPhiloxM1, c[2], lo1, hi1);
    c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
    k0 += kPhiloxW0;
    k1 += kPhiloxW1;
  }
  return c;
}

double standard_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const auto block = Philox4x32::generate(seed, stream, index >> 1);
  const double u1 = to_unit_open(block[0], block[1]);
  const double u2 = to_unit_open(block[2], block[3]);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return (index & 1U) ? radius * std::sin(angle) : radius * std::cos(angle);
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(seed ^ mix64(index));
}

SampleSet sample_vectors(std::uint64_t seed, std::size_t d, std::size_t m) {
  if (d == 0 || m == 0) {
    throw std::invalid_argument("sample_vectors: d and m must be positive");
  }
  SampleSet out;
  out.d = d;
  out.m = m;
  out.seed = seed;
  out.vectors.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      out.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          scale * standard_normal(seed, kVectorStream, i * d + j);
    }
  }
  return out;
}

GoeMatrix sample_goe(std::uint64_t seed, std::size_t n, double variance) {
  if (n == 0) {
    throw std::invalid_argument("sample_goe: n must be positive");
  }
  if (!(variance > 0.0)) {
    throw std::invalid_argument("sample_goe: variance must be positive");
  }
  GoeMatrix out;
  out.n = n;
  out.seed = seed;
  const auto nn = static_cast<Eigen::Index>(n);
  out.entries = Matrix::Zero(nn, nn);
  const double scale = std::sqrt(variance);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double g = scale * standard_normal(seed, kGoeStream, i * n + j);
      out.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = g;
      out.entries(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = g;
    }
  }
  return out;
}

SampleSet from_rows(const Matrix& rows) {
  if (rows.rows() == 0 || rows.cols() == 0) {
    throw std::invalid_argument("from_rows: empty matrix");
  }
  SampleSet out;
  out.m = static_cast<std::size_t>(rows.rows());
  out.d = static_cast<std::size_t>(rows.cols());
  out.vectors = rows;
  return out;
}

Vector probe_vector(std::uint64_t seed, std::size_t n) {
  Vector v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    v(static_cast<Eigen::Index>(i)) = standard_normal(seed, kProbeStream, i);
  }
  const double norm = v.norm();
  if (norm > 0.0) v /= norm;
  return v;
}

}  // namespace ellfit::sampling
