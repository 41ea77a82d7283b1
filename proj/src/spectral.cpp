#include "ellfit/spectral.hpp"

#include "ellfit/sampling.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <vector>

namespace ellfit::spectral {

namespace {

struct RitzState {
  double value = 0.0;
  double residual = 0.0;
  int stable_checks = 0;
};

void update_ritz(RitzState& state, double value, double residual, double tol) {
  const double scale = std::max(1.0, std::abs(value));
  if (std::abs(value - state.value) <= tol * scale) {
    ++state.stable_checks;
  } else {
    state.stable_checks = 0;
  }
  state.value = value;
  state.residual = residual;
}

bool accepted(const RitzState& state, double tol) {
  return state.residual <= tol * std::max(1.0, std::abs(state.value)) && state.stable_checks >= 3;
}

SpectralReport finish(double lo, double hi, int iterations, bool converged, double tol) {
  SpectralReport r;
  r.lambda_min = lo;
  r.lambda_max = hi;
  r.norm_estimate = std::max(std::abs(lo), std::abs(hi));
  r.iterations = iterations;
  r.converged = converged;
  r.tolerance = tol;
  return r;
}

}  // namespace

void require_symmetric(const Matrix& sym, double rel_tol) {
  if (sym.rows() != sym.cols()) {
    throw Error(ErrorCode::NonSymmetric, "matrix is not square");
  }
  if (sym.size() == 0) return;
  const double scale = sym.cwiseAbs().maxCoeff();
  const double asym = (sym - sym.transpose()).cwiseAbs().maxCoeff();
  if (asym > rel_tol * std::max(scale, 1e-300)) {
    throw Error(ErrorCode::NonSymmetric, "matrix is not symmetric");
  }
}

SpectralReport spectral_norm(const LinearOperator& op, std::size_t n,
                             const SpectralOptions& options) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("spectral_norm: tol must be positive");
  if (n == 0) return finish(0.0, 0.0, 0, true, options.tol);

  const int kmax = std::max(1, std::min<int>(options.max_iter, static_cast<int>(n)));
  std::vector<Vector> basis;
  basis.reserve(static_cast<std::size_t>(kmax) + 1);
  basis.push_back(sampling::probe_vector(options.seed, n));

  std::vector<double> alpha;
  std::vector<double> beta;
  RitzState low, high;
  double lo = 0.0, hi = 0.0;
  double op_scale = 0.0;

  for (int k = 0; k < kmax; ++k) {
    Vector w = op(basis[static_cast<std::size_t>(k)]);
    const double a = basis[static_cast<std::size_t>(k)].dot(w);
    alpha.push_back(a);
    op_scale = std::max(op_scale, w.norm());
    // Two passes of classical Gram-Schmidt against the whole basis.
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vector& qj : basis) w -= qj.dot(w) * qj;
    }
    const double b = w.norm();
    const int size = k + 1;
    const bool exhausted = b <= 1e-13 * std::max(op_scale, 1e-300) || size == static_cast<int>(n);

    const bool check = exhausted || size < 60 || size % 5 == 0 || size == kmax;
    if (check) {
      Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), size);
      Eigen::VectorXd sub = size > 1 ? Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(
                                           beta.data(), size - 1))
                                     : Eigen::VectorXd();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
      tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      const auto& vals = tri.eigenvalues();
      const auto& vecs = tri.eigenvectors();
      lo = vals(0);
      hi = vals(size - 1);
      update_ritz(low, lo, b * std::abs(vecs(size - 1, 0)), options.tol);
      update_ritz(high, hi, b * std::abs(vecs(size - 1, size - 1)), options.tol);
      if (exhausted) return finish(lo, hi, size, true, options.tol);
      if (accepted(low, options.tol) && accepted(high, options.tol)) {
        return finish(lo, hi, size, true, options.tol);
      }
    }
    beta.push_back(b);
    basis.push_back(w / b);
  }
  return finish(lo, hi, kmax, false, options.tol);
}

SpectralReport spectral_norm(const Matrix& sym, const SpectralOptions& options) {
  require_symmetric(sym);
  const LinearOperator op = [&sym](const Vector& x) -> Vector { return sym * x; };
  return spectral_norm(op, static_cast<std::size_t>(sym.rows()), options);
}

SpectralReport dense_extremes(const Matrix& sym) {
  require_symmetric(sym);
  if (sym.rows() == 0) return finish(0.0, 0.0, 0, true, 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(Eigen::MatrixXd(sym),
                                                        Eigen::EigenvaluesOnly);
  const auto& vals = solver.eigenvalues();
  return finish(vals(0), vals(vals.size() - 1), 0, solver.info() == Eigen::Success, 0.0);
}

bool psd_check(const Matrix& sym, double slack, const SpectralOptions& options) {
  const SpectralReport report = spectral_norm(sym, options);
  const double allowed = slack < 0.0 ? 1e-8 * report.norm_estimate : slack;
  return report.lambda_min >= -allowed;
}

}  // namespace ellfit::spectral
