#pragma once

// Small dense linear algebra layer. Square solves go through LU with partial
// pivoting; everything rank related goes through singular values.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "rnewton/errors.hpp"

namespace rnewton {

using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using DenseVector = Eigen::VectorXd;

inline constexpr double kPivotTolerance = 1e-12;
inline constexpr double kDefaultTruncTol = 1e-10;

namespace detail {

inline Eigen::VectorXd singular_values(const DenseMatrix& a) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues();
}

// Singular values at or below this are exact zeros for the purposes of
// condition numbers.
inline double zero_floor(const DenseMatrix& a, double sigma_max) {
  const auto n = static_cast<double>(std::max(a.rows(), a.cols()));
  return sigma_max * n * std::numeric_limits<double>::epsilon();
}

}  // namespace detail

/// Solves A x = b for square A. Throws SingularMatrix when a pivot falls
/// below 1e-12 times the largest row norm of A.
inline DenseVector solve_square(const DenseMatrix& a, const DenseVector& b) {
  if (a.rows() != a.cols() || b.size() != a.rows()) {
    throw ShapeMismatch("solve_square: expected square A with matching rhs");
  }
  if (a.rows() == 0) return DenseVector(0);
  const double row_scale = a.rowwise().norm().maxCoeff();
  if (!(row_scale > 0.0) || !std::isfinite(row_scale)) {
    throw SingularMatrix("solve_square: zero or non-finite matrix");
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const auto& packed = lu.matrixLU();
  for (Eigen::Index i = 0; i < packed.rows(); ++i) {
    if (std::abs(packed(i, i)) < kPivotTolerance * row_scale) {
      throw SingularMatrix("solve_square: pivot below tolerance at step " + std::to_string(i));
    }
  }
  return lu.solve(b);
}

/// Minimum-norm least-squares solution via truncated SVD. Singular values
/// below trunc_tol * sigma_max are discarded.
inline DenseVector solve_least_squares(const DenseMatrix& a, const DenseVector& b,
                                       double trunc_tol = kDefaultTruncTol) {
  if (a.rows() < 1 || b.size() != a.rows()) {
    throw ShapeMismatch("solve_least_squares: rhs length must equal rows");
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  if (!(smax > std::numeric_limits<double>::min())) {
    throw ZeroMatrix("solve_least_squares: all singular values vanish");
  }
  const double cut = trunc_tol * smax;
  DenseVector utb = svd.matrixU().transpose() * b;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    utb(i) = s(i) > cut ? utb(i) / s(i) : 0.0;
  }
  return svd.matrixV() * utb;
}

/// Spectral condition number sigma_max / sigma_min. Returns +infinity when
/// sigma_min is zero to working precision.
inline double condition_number(const DenseMatrix& a) {
  const Eigen::VectorXd s = detail::singular_values(a);
  if (s.size() == 0) return std::numeric_limits<double>::infinity();
  const double smax = s(0);
  // A wide matrix has min(rows, cols) singular values; a square-or-tall
  // Jacobian is what the solver feeds in.
  const double smin = s(s.size() - 1);
  if (!(smax > 0.0) || smin <= detail::zero_floor(a, smax)) {
    return std::numeric_limits<double>::infinity();
  }
  return smax / smin;
}

/// Number of singular values strictly above tol * sigma_max.
inline std::size_t numerical_rank(const DenseMatrix& a, double tol) {
  const Eigen::VectorXd s = detail::singular_values(a);
  if (s.size() == 0 || !(s(0) > 0.0)) return 0;
  const double cut = tol * s(0);
  return static_cast<std::size_t>((s.array() > cut).count());
}

/// Rank and condition number from one SVD; used by the solver every step.
struct SpectrumSummary {
  std::size_t rank = 0;
  double condition = std::numeric_limits<double>::infinity();
};

inline SpectrumSummary spectrum_summary(const DenseMatrix& a, double rank_tol) {
  SpectrumSummary out;
  const Eigen::VectorXd s = detail::singular_values(a);
  if (s.size() == 0 || !(s(0) > 0.0)) return out;
  out.rank = static_cast<std::size_t>((s.array() > rank_tol * s(0)).count());
  const double smin = s(s.size() - 1);
  if (smin > detail::zero_floor(a, s(0))) out.condition = s(0) / smin;
  return out;
}

}  // namespace rnewton
