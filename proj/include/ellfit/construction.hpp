#pragma once

#include "ellfit/common.hpp"
#include "ellfit/sampling.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cstddef>
#include <memory>
#include <optional>

namespace ellfit::construction {

/// Dense solver for a symmetric system: Cholesky when the matrix is positive
/// definite, partial-pivot LU otherwise. Holds the factorization.
class SymmetricSolver {
 public:
  explicit SymmetricSolver(const Matrix& a);

  bool spd() const { return spd_; }
  /// Reciprocal 1-norm condition estimate from the factorization.
  double rcond() const { return rcond_; }
  Vector solve(const Vector& b) const;

 private:
  Eigen::LLT<Matrix> llt_;
  Eigen::PartialPivLU<Matrix> lu_;
  bool spd_ = false;
  double rcond_ = 0.0;
};

inline constexpr double kConditionLimit = 1e8;

struct Gram {
  Matrix M;    // M[i,j] = <v_i, v_j>^2
  Vector eta;  // eta_i = |v_i|^2 - 1
};

Gram build_gram(const sampling::SampleSet& sample);

/// Every piece of the identity-perturbation analysis of M. The diagonal
/// parts are stored as their diagonals.
struct Decomposition {
  std::size_t d = 0;
  std::size_t m = 0;
  Matrix M;
  Vector eta;
  Matrix Malpha;  // zero diagonal
  Matrix Mbeta;   // zero diagonal
  Vector MD;      // M_D = M_D1 + M_D2 + (2 + 2/d) M_D3
  Vector MD1;
  Vector MD2;
  Vector MD3;
  Matrix A;  // Malpha + Mbeta + diag(MD) + (1 + 1/d) I
  Matrix B;  // (1/d) [1 eta] [[1,1],[1,0]] [1 eta]^T
  double r = 0.0;  // 1^T A^{-1} 1 / d
  double s = 0.0;  // 1 + eta^T A^{-1} 1 / d
  double u = 0.0;  // -1 + eta^T A^{-1} eta / d
  Vector Ainv_ones;
  Vector Ainv_eta;
  std::shared_ptr<const SymmetricSolver> A_solver;

  Vector solve_A(const Vector& b) const { return A_solver->solve(b); }
  double woodbury_denominator() const { return s * s - r * u; }
};

/// Builds the full decomposition. Throws Error(SingularMatrix) if A cannot
/// be factored.
Decomposition decompose(const sampling::SampleSet& sample);

/// Fast-path pieces, shared with graph-matrix realization.
Matrix malpha_matrix(const Matrix& vectors);
Matrix mbeta_matrix(const Matrix& vectors);

struct Candidate {
  Vector w;
  Matrix Lambda;  // I - R
  Matrix R;       // sum_i w_i v_i v_i^T
  double residual = 0.0;  // max_i |v_i^T Lambda v_i - 1|
  double condition_estimate = 0.0;
  bool ill_conditioned = false;
};

/// Solves M w = eta by a direct dense solve and assembles Lambda. Throws
/// Error(SingularMatrix) when the solve fails or its relative residual
/// exceeds 1e-8.
Candidate solve_weights(const Decomposition& dec, const sampling::SampleSet& sample);

/// Candidate from an already computed weight vector.
Candidate candidate_from_weights(const Vector& w, const sampling::SampleSet& sample);

/// M^{-1} eta through the rank-2 Woodbury correction of A. Throws
/// Error(DegenerateScalars) when s^2 - ru vanishes numerically.
Vector woodbury_inverse_eta(const Decomposition& dec);

/// sum_i c_i v_i v_i^T = V^T diag(c) V.
Matrix weighted_outer_sum(const sampling::SampleSet& sample, const Vector& c);

/// sum_i v_i v_i^T.
Matrix sum_vv(const sampling::SampleSet& sample);

struct RSplit {
  Matrix R1;
  Matrix R2;
  Matrix ER;
  Matrix R;
};

/// R = R1 + R2 + E_R where R1, R2 use `truncated_inverse` in place of A^{-1}.
RSplit assemble_R_split(const Decomposition& dec, const sampling::SampleSet& sample,
                        const LinearOperator& truncated_inverse);

}  // namespace ellfit::construction
