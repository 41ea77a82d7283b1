#pragma once

#include "ellfit/common.hpp"
#include "ellfit/construction.hpp"
#include "ellfit/spectral.hpp"

#include <array>
#include <cstddef>
#include <optional>

namespace ellfit::neumann {

/// Per-matrix occurrence caps (M_alpha, M_beta, M_D, I/d) for the exact
/// capped truncation.
struct Caps {
  std::array<int, 4> tau{0, 0, 3, 1};
};

struct NeumannConfig {
  int K = 0;
  std::optional<Caps> caps;
};

/// Default total-degree cap: ceil(log2 d) + 4.
int default_degree(std::size_t d);

/// T x = -(M_alpha + M_beta + M_D + I/d) x, so that A = I - T.
Vector apply_T(const construction::Decomposition& dec, const Vector& x);

/// Partial sums of (I - T)^{-1} = sum_k T^k. Construction estimates ||T||
/// once and throws Error(DivergentSeries) if it is not below 1.
class NeumannSeries {
 public:
  explicit NeumannSeries(const construction::Decomposition& dec,
                         const spectral::SpectralOptions& options = {});

  double t_norm() const { return t_norm_; }

  /// sum_{k=0}^{K} T^k x using K matrix-vector products.
  Vector apply(const Vector& x, int K) const;

 private:
  const construction::Decomposition* dec_;
  double t_norm_ = 0.0;
};

Vector neumann_apply(const construction::Decomposition& dec, const Vector& x, int K);

/// Exact capped truncation: sum over ordered products Q_1...Q_k, k <= maxdeg,
/// of (-1)^k Q_1...Q_k with Q_i in {M_alpha, M_beta, M_D, I/d} and each
/// matrix used at most its cap. Limited to m <= 64 and maxdeg <= 6.
Matrix truncated_T0_exact(const construction::Decomposition& dec, const Caps& caps, int maxdeg);

/// Spectral-norm estimate of A^{-1} - sum_{k<=K} T^k.
double truncation_error(const construction::Decomposition& dec, int K,
                        const spectral::SpectralOptions& options = {});

}  // namespace ellfit::neumann
