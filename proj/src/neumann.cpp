#include "ellfit/neumann.hpp"

#include <cmath>
#include <string>

namespace ellfit::neumann {

int default_degree(std::size_t d) {
  int bits = 0;
  while ((std::size_t{1} << bits) < d) ++bits;
  return bits + 4;
}

Vector apply_T(const construction::Decomposition& dec, const Vector& x) {
  const double inv_d = 1.0 / static_cast<double>(dec.d);
  Vector y = dec.Malpha * x;
  y.noalias() += dec.Mbeta * x;
  y.array() += dec.MD.array() * x.array() + inv_d * x.array();
  return -y;
}

NeumannSeries::NeumannSeries(const construction::Decomposition& dec,
                             const spectral::SpectralOptions& options)
    : dec_(&dec) {
  const LinearOperator op = [&dec](const Vector& x) { return apply_T(dec, x); };
  t_norm_ = spectral::spectral_norm(op, dec.m, options).norm_estimate;
  if (!(t_norm_ < 1.0)) {
    throw Error(ErrorCode::DivergentSeries,
                "Neumann series diverges: ||T|| estimate " + std::to_string(t_norm_));
  }
}

Vector NeumannSeries::apply(const Vector& x, int K) const {
  if (K < 0) throw std::invalid_argument("neumann_apply: K must be nonnegative");
  Vector term = x;
  Vector sum = x;
  for (int k = 1; k <= K; ++k) {
    term = apply_T(*dec_, term);
    sum += term;
  }
  return sum;
}

Vector neumann_apply(const construction::Decomposition& dec, const Vector& x, int K) {
  return NeumannSeries(dec).apply(x, K);
}

namespace {

struct CappedEnumerator {
  const construction::Decomposition& dec;
  const Caps& caps;
  int maxdeg;
  Matrix result;
  std::array<int, 4> used{0, 0, 0, 0};

  // prefix * Q_which
  Matrix times(const Matrix& prefix, int which) const {
    switch (which) {
      case 0: return prefix * dec.Malpha;
      case 1: return prefix * dec.Mbeta;
      case 2: return prefix * dec.MD.asDiagonal();
      default: return prefix / static_cast<double>(dec.d);
    }
  }

  void walk(const Matrix& prefix, int depth) {
    if (depth % 2 == 0) {
      result += prefix;
    } else {
      result -= prefix;
    }
    if (depth == maxdeg) return;
    for (int which = 0; which < 4; ++which) {
      if (used[which] >= caps.tau[which]) continue;
      ++used[which];
      walk(times(prefix, which), depth + 1);
      --used[which];
    }
  }
};

}  // namespace

Matrix truncated_T0_exact(const construction::Decomposition& dec, const Caps& caps, int maxdeg) {
  if (dec.m > 64 || maxdeg > 6) {
    throw Error(ErrorCode::SizeLimit, "truncated_T0_exact is limited to m <= 64 and maxdeg <= 6");
  }
  if (maxdeg < 0) throw std::invalid_argument("truncated_T0_exact: maxdeg must be nonnegative");
  for (int c : caps.tau) {
    if (c < 0) throw std::invalid_argument("truncated_T0_exact: caps must be nonnegative");
  }
  const auto m = static_cast<Eigen::Index>(dec.m);
  CappedEnumerator e{dec, caps, maxdeg, Matrix::Zero(m, m)};
  e.walk(Matrix::Identity(m, m), 0);
  return e.result;
}

double truncation_error(const construction::Decomposition& dec, int K,
                        const spectral::SpectralOptions& options) {
  const NeumannSeries series(dec, options);
  const LinearOperator diff = [&](const Vector& x) -> Vector {
    return dec.solve_A(x) - series.apply(x, K);
  };
  return spectral::spectral_norm(diff, dec.m, options).norm_estimate;
}

}  // namespace ellfit::neumann
