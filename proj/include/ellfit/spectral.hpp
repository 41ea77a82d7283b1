#pragma once

#include "ellfit/common.hpp"

#include <cstddef>
#include <cstdint>

namespace ellfit::spectral {

struct SpectralReport {
  double norm_estimate = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  int iterations = 0;
  bool converged = false;
  double tolerance = 0.0;
};

struct SpectralOptions {
  double tol = 1e-10;
  int max_iter = 500;
  std::uint64_t seed = 0x5eed;
};

/// Extreme eigenvalues of a symmetric operator.
///
/// Krylov (Lanczos) iteration from a seeded start vector with full
/// reorthogonalisation. A Ritz extreme is accepted once its residual bound
/// |beta_k * s_k| falls below tol * max(1, |lambda|) and its value has changed
/// by less than tol relatively over three consecutive checks. If the Krylov
/// space is exhausted the extremes are exact. `converged` is false when
/// max_iter is reached first.
SpectralReport spectral_norm(const LinearOperator& op, std::size_t n,
                             const SpectralOptions& options = {});

/// Dense overload. Throws Error(NonSymmetric) when the input is not
/// symmetric to 1e-10 relative to its largest entry.
SpectralReport spectral_norm(const Matrix& sym, const SpectralOptions& options = {});

/// Extremes from a dense symmetric eigensolver. Test oracle for small n.
SpectralReport dense_extremes(const Matrix& sym);

/// True iff lambda_min >= -slack. A negative slack selects the default
/// 1e-8 * ||sym||.
bool psd_check(const Matrix& sym, double slack = -1.0, const SpectralOptions& options = {});

void require_symmetric(const Matrix& sym, double rel_tol = 1e-10);

}  // namespace ellfit::spectral
