#include "ellfit/construction.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace ellfit::construction {

namespace {

// X X^T via a symmetric rank-k update, both triangles filled.
Matrix outer_gram(const Matrix& x) {
  const Eigen::Index n = x.rows();
  Matrix lower = Matrix::Zero(n, n);
  lower.selfadjointView<Eigen::Lower>().rankUpdate(x);
  Matrix full = lower.selfadjointView<Eigen::Lower>();
  return full;
}

}  // namespace

SymmetricSolver::SymmetricSolver(const Matrix& a) {
  llt_.compute(a);
  if (llt_.info() == Eigen::Success) {
    spd_ = true;
    rcond_ = llt_.rcond();
  } else {
    lu_.compute(a);
    rcond_ = lu_.rcond();
  }
  if (!std::isfinite(rcond_) || rcond_ < std::numeric_limits<double>::epsilon()) {
    throw Error(ErrorCode::SingularMatrix,
                "matrix is numerically singular (rcond=" + std::to_string(rcond_) + ")");
  }
}

Vector SymmetricSolver::solve(const Vector& b) const {
  return spd_ ? Vector(llt_.solve(b)) : Vector(lu_.solve(b));
}

Gram build_gram(const sampling::SampleSet& sample) {
  Gram g;
  g.M = outer_gram(sample.vectors).array().square().matrix();
  g.eta = sample.vectors.rowwise().squaredNorm().array() - 1.0;
  return g;
}

Matrix malpha_matrix(const Matrix& vectors) {
  // sum_{a != b} v_i[a] v_i[b] v_j[a] v_j[b] = <v_i,v_j>^2 - sum_a v_i[a]^2 v_j[a]^2
  Matrix squares = vectors.array().square().matrix();
  Matrix out = outer_gram(vectors).array().square().matrix();
  out -= outer_gram(squares);
  out.diagonal().setZero();
  return out;
}

Matrix mbeta_matrix(const Matrix& vectors) {
  const double inv_d = 1.0 / static_cast<double>(vectors.cols());
  Matrix h2 = (vectors.array().square() - inv_d).matrix();
  Matrix out = outer_gram(h2);
  out.diagonal().setZero();
  return out;
}

Decomposition decompose(const sampling::SampleSet& sample) {
  Decomposition dec;
  dec.d = sample.d;
  dec.m = sample.m;
  const auto m = static_cast<Eigen::Index>(sample.m);
  const double dd = static_cast<double>(sample.d);
  const double inv_d = 1.0 / dd;
  const Matrix& v = sample.vectors;

  Gram g = build_gram(sample);
  dec.M = std::move(g.M);
  dec.eta = std::move(g.eta);

  const Matrix squares = v.array().square().matrix();
  dec.Malpha = dec.M - outer_gram(squares);
  dec.Malpha.diagonal().setZero();
  dec.Mbeta = mbeta_matrix(v);

  const Vector norm2 = v.rowwise().squaredNorm();
  dec.MD = norm2.array().square() - 2.0 * inv_d * norm2.array() - 1.0;

  const Matrix h2 = (squares.array() - inv_d).matrix();
  const Vector h2_sq_sum = h2.rowwise().squaredNorm();
  dec.MD3 = dec.eta;
  dec.MD1 = dec.eta.array().square() - h2_sq_sum.array();
  dec.MD2 = (squares.array().square() - 6.0 * inv_d * squares.array() + 3.0 * inv_d * inv_d)
                .matrix()
                .rowwise()
                .sum();

  dec.A = dec.Malpha + dec.Mbeta;
  dec.A.diagonal() += dec.MD + Vector::Constant(m, 1.0 + inv_d);

  Matrix u(m, 2);
  u.col(0).setOnes();
  u.col(1) = dec.eta;
  Eigen::Matrix2d c;
  c << 1.0, 1.0, 1.0, 0.0;
  dec.B = inv_d * (u * c * u.transpose());

  dec.A_solver = std::make_shared<const SymmetricSolver>(dec.A);
  const Vector ones = Vector::Ones(m);
  dec.Ainv_ones = dec.A_solver->solve(ones);
  dec.Ainv_eta = dec.A_solver->solve(dec.eta);
  dec.r = ones.dot(dec.Ainv_ones) * inv_d;
  dec.s = 1.0 + dec.eta.dot(dec.Ainv_ones) * inv_d;
  dec.u = -1.0 + dec.eta.dot(dec.Ainv_eta) * inv_d;
  return dec;
}

Matrix weighted_outer_sum(const sampling::SampleSet& sample, const Vector& c) {
  const Matrix& v = sample.vectors;
  Matrix scaled = c.asDiagonal() * v;
  Matrix out = v.transpose() * scaled;
  // Exact symmetry regardless of summation order.
  return 0.5 * (out + out.transpose());
}

Matrix sum_vv(const sampling::SampleSet& sample) {
  return weighted_outer_sum(sample, Vector::Ones(static_cast<Eigen::Index>(sample.m)));
}

Candidate candidate_from_weights(const Vector& w, const sampling::SampleSet& sample) {
  Candidate cand;
  cand.w = w;
  cand.R = weighted_outer_sum(sample, w);
  const auto d = static_cast<Eigen::Index>(sample.d);
  cand.Lambda = Matrix::Identity(d, d) - cand.R;
  const Matrix& v = sample.vectors;
  const Vector quad = (v * cand.Lambda).cwiseProduct(v).rowwise().sum();
  cand.residual = (quad.array() - 1.0).abs().maxCoeff();
  return cand;
}

Candidate solve_weights(const Decomposition& dec, const sampling::SampleSet& sample) {
  const auto m = static_cast<Eigen::Index>(dec.m);
  if (dec.eta.isZero(0.0)) {
    Candidate cand = candidate_from_weights(Vector::Zero(m), sample);
    cand.condition_estimate = 1.0;
    return cand;
  }
  const SymmetricSolver solver(dec.M);
  const Vector w = solver.solve(dec.eta);
  const double rel = (dec.M * w - dec.eta).norm() / dec.eta.norm();
  if (!std::isfinite(rel) || rel >= 1e-8) {
    throw Error(ErrorCode::SingularMatrix,
                "solve of M w = eta failed (relative residual " + std::to_string(rel) + ")");
  }
  Candidate cand = candidate_from_weights(w, sample);
  cand.condition_estimate = 1.0 / solver.rcond();
  cand.ill_conditioned = cand.condition_estimate > kConditionLimit;
  return cand;
}

Vector woodbury_inverse_eta(const Decomposition& dec) {
  const double denom = dec.woodbury_denominator();
  if (!(std::abs(denom) > 1e-12 * std::max(1.0, std::abs(dec.r * dec.u)))) {
    throw Error(ErrorCode::DegenerateScalars, "s^2 - ru vanishes numerically");
  }
  return ((dec.r + dec.s) / denom) * dec.Ainv_eta - ((dec.u + dec.s) / denom) * dec.Ainv_ones;
}

RSplit assemble_R_split(const Decomposition& dec, const sampling::SampleSet& sample,
                        const LinearOperator& truncated_inverse) {
  const Vector w = woodbury_inverse_eta(dec);
  const double denom = dec.woodbury_denominator();
  const auto m = static_cast<Eigen::Index>(dec.m);
  const Vector t_eta = truncated_inverse(dec.eta);
  const Vector t_ones = truncated_inverse(Vector::Ones(m));
  RSplit out;
  out.R = weighted_outer_sum(sample, w);
  out.R1 = weighted_outer_sum(sample, ((dec.r + dec.s) / denom) * t_eta);
  out.R2 = weighted_outer_sum(sample, ((-dec.u - dec.s) / denom) * t_ones);
  out.ER = out.R - out.R1 - out.R2;
  return out;
}

}  // namespace ellfit::construction
