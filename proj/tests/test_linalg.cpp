#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rnewton/linalg.hpp"

namespace rnewton {
namespace {

DenseMatrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  DenseMatrix a(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) a(i, j++) = v;
    ++i;
  }
  return a;
}

DenseVector vec(std::initializer_list<double> v) {
  DenseVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

TEST(SolveSquare, Identity) {
  const DenseVector x = solve_square(DenseMatrix::Identity(3, 3), vec({1, 2, 3}));
  EXPECT_TRUE(x.isApprox(vec({1, 2, 3})));
}

TEST(SolveSquare, Diagonal) {
  const DenseVector x = solve_square(mat({{2, 0}, {0, 4}}), vec({2, 8}));
  EXPECT_DOUBLE_EQ(x(0), 1.0);
  EXPECT_DOUBLE_EQ(x(1), 2.0);
}

TEST(SolveSquare, RecoversKnownSolution) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  DenseMatrix a(5, 5);
  for (Eigen::Index i = 0; i < 5; ++i) {
    for (Eigen::Index j = 0; j < 5; ++j) a(i, j) = g(rng);
  }
  a += 5.0 * DenseMatrix::Identity(5, 5);
  DenseVector xs(5);
  for (Eigen::Index i = 0; i < 5; ++i) xs(i) = g(rng);
  const DenseVector x = solve_square(a, a * xs);
  EXPECT_LE((x - xs).norm() / xs.norm(), 1e-10);
}

TEST(SolveSquare, SingularThrows) {
  EXPECT_THROW(solve_square(mat({{1, 1}, {1, 1}}), vec({1, 2})), SingularMatrix);
  EXPECT_THROW(solve_square(DenseMatrix::Zero(2, 2), vec({1, 2})), SingularMatrix);
}

TEST(SolveSquare, ShapeChecks) {
  EXPECT_THROW(solve_square(DenseMatrix::Zero(2, 3), vec({1, 2})), ShapeMismatch);
  EXPECT_THROW(solve_square(DenseMatrix::Identity(2, 2), vec({1, 2, 3})), ShapeMismatch);
}

TEST(LeastSquares, Identity) {
  const DenseVector x = solve_least_squares(DenseMatrix::Identity(2, 2), vec({3, 4}), 1e-12);
  EXPECT_NEAR(x(0), 3.0, 1e-14);
  EXPECT_NEAR(x(1), 4.0, 1e-14);
}

TEST(LeastSquares, TallColumn) {
  // Normal equations: 2 x = 4.
  const DenseVector x = solve_least_squares(mat({{1}, {1}}), vec({1, 3}));
  ASSERT_EQ(x.size(), 1);
  EXPECT_NEAR(x(0), 2.0, 1e-14);
}

TEST(LeastSquares, RankOneMinimumNorm) {
  const DenseVector x = solve_least_squares(mat({{1, 1}, {1, 1}}), vec({2, 2}), 1e-12);
  EXPECT_NEAR(x(0), 1.0, 1e-14);
  EXPECT_NEAR(x(1), 1.0, 1e-14);
}

TEST(LeastSquares, TruncationDropsSmallDirections) {
  const DenseMatrix a = mat({{1, 0}, {0, 1e-8}});
  const DenseVector b = vec({1, 1});
  EXPECT_NEAR(solve_least_squares(a, b, 1e-6)(1), 0.0, 0.0);
  EXPECT_NEAR(solve_least_squares(a, b, 1e-10)(1), 1e8, 1e-2);
}

TEST(LeastSquares, ZeroMatrixThrows) {
  EXPECT_THROW(solve_least_squares(DenseMatrix::Zero(3, 2), vec({1, 2, 3})), ZeroMatrix);
}

TEST(ConditionNumber, Examples) {
  EXPECT_NEAR(condition_number(DenseMatrix::Identity(4, 4)), 1.0, 1e-14);
  EXPECT_NEAR(condition_number(mat({{10, 0}, {0, 0.1}})), 100.0, 1e-10);
  EXPECT_TRUE(std::isinf(condition_number(mat({{1, 2}, {2, 4}}))));
}

TEST(NumericalRank, Examples) {
  EXPECT_EQ(numerical_rank(DenseMatrix::Identity(3, 3), 1e-8), 3u);
  EXPECT_EQ(numerical_rank(mat({{1, 1}, {1, 1}}), 1e-8), 1u);
  EXPECT_EQ(numerical_rank(DenseMatrix::Zero(2, 2), 1e-8), 0u);
}

TEST(SpectrumSummary, AgreesWithSeparateCalls) {
  const DenseMatrix a = mat({{3, 1, 0}, {1, 2, 0}, {0, 0, 1e-9}});
  const auto s = spectrum_summary(a, 1e-6);
  EXPECT_EQ(s.rank, numerical_rank(a, 1e-6));
  EXPECT_NEAR(s.condition, condition_number(a), 1e-6 * condition_number(a));
}

}  // namespace
}  // namespace rnewton
