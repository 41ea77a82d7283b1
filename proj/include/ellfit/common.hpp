#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace ellfit {

/// Dense storage used throughout: row-major, 64-bit floating point.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// y = Op(x) for a symmetric linear operator of known dimension.
using LinearOperator = std::function<Vector(const Vector&)>;

enum class ErrorCode {
  SingularMatrix,
  DegenerateScalars,
  DivergentSeries,
  SizeLimit,
  UnknownShape,
  NonSymmetric,
  DimensionTooSmall,
};

const char* to_string(ErrorCode code);

/// Numerical failure raised by the library. Invalid arguments use
/// std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ellfit
