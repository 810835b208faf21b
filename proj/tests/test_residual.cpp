#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include "rnewton/rnewton.hpp"

namespace rnewton {
namespace {

constexpr double kPi = std::numbers::pi;

DenseVector exact_theta() {
  DenseVector t(4);
  t << 2.0 * kPi, 0.0, 1.0, 0.0;
  return t;
}

TEST(BuildPlan, UnitIntervalStepTenth) {
  const auto plan = build_plan(make_problem("poisson1d"), UniformGrid{0.1}, 0, 4);
  EXPECT_EQ(plan.points(), 11u);
  EXPECT_EQ(plan.interior.size(), 9u);
  EXPECT_EQ(plan.boundary.size(), 2u);
  EXPECT_EQ(plan.boundary.front().x(0), 0.0);
  EXPECT_EQ(plan.boundary.back().x(0), 1.0);
}

TEST(BuildPlan, SquareEdgesAreBoundaryAndCornersUnique) {
  const ProblemSpec p = make_problem("poisson2d");
  const auto plan = build_plan(p, UniformGrid{0.01}, 0, 25);
  const std::size_t n = 314;  // intervals per axis on [0, pi]
  EXPECT_EQ(plan.points(), (n + 1) * (n + 1));
  EXPECT_EQ(plan.boundary.size(), 4 * n);
  std::set<std::pair<double, double>> seen;
  for (const auto& b : plan.boundary) {
    const double x = b.x(0), y = b.x(1);
    EXPECT_TRUE(x == 0.0 || y == 0.0 || x == kPi || y == kPi);
    EXPECT_TRUE(seen.insert({x, y}).second);
  }
  for (const auto& x : plan.interior) {
    EXPECT_GT(x(0), 0.0);
    EXPECT_LT(x(1), kPi);
  }
}

TEST(BuildPlan, UnderdeterminedThrows) {
  const ProblemSpec p = make_problem("poisson1d");
  EXPECT_THROW(build_plan(p, UniformGrid{0.1}, 0, 31), Underdetermined);
  EXPECT_THROW(build_plan(p, UniformGrid{0.1}, 0, 11), Underdetermined);
  EXPECT_NO_THROW(build_plan(p, UniformGrid{0.1}, 0, 10));
}

TEST(BuildPlan, ProvenanceMustMatchDomain) {
  EXPECT_THROW(build_plan(make_problem("laplace_ball"), UniformGrid{0.1}, 0, 4), ConfigError);
  EXPECT_THROW(build_plan(make_problem("poisson1d"), RandomBall{100, 0.2}, 0, 4), ConfigError);
  EXPECT_THROW(build_plan(make_problem("poisson1d"), UniformGrid{0.0}, 0, 4), ConfigError);
}

TEST(BuildPlan, RandomPlansAreSeeded) {
  const ProblemSpec p = make_problem("poisson2d");
  const auto a = build_plan(p, RandomUniform{200, 0.25}, 5, 25);
  const auto b = build_plan(p, RandomUniform{200, 0.25}, 5, 25);
  const auto c = build_plan(p, RandomUniform{200, 0.25}, 6, 25);
  ASSERT_EQ(a.points(), 200u);
  EXPECT_EQ(a.boundary.size(), 50u);
  EXPECT_EQ(a.interior[17], b.interior[17]);
  EXPECT_NE(a.interior[17], c.interior[17]);
}

TEST(BuildPlan, BallSamplesInsideAndOnSphere) {
  const ProblemSpec p = make_problem("laplace_ball", {3, false});
  const auto plan = build_plan(p, RandomBall{500, 0.2}, 1, 100);
  EXPECT_EQ(plan.boundary.size(), 100u);
  for (const auto& x : plan.interior) EXPECT_LT(x.norm(), 1.0);
  for (const auto& b : plan.boundary) EXPECT_NEAR(b.x.norm(), 1.0, 1e-14);
}

TEST(BuildPlan, NeumannNormalsForGrayScott) {
  const auto plan = build_plan(make_problem("gray_scott", {2, false}), UniformGrid{0.25}, 0, 10);
  for (const auto& b : plan.boundary) {
    EXPECT_EQ(b.kind.type, BoundaryType::Neumann);
    EXPECT_NEAR(b.kind.normal.norm(), 1.0, 1e-14);
  }
}

TEST(PlanCsv, KindsListed) {
  const auto plan = build_plan(make_problem("bratu_family"), UniformGrid{0.25}, 0, 3);
  std::ostringstream os;
  write_plan_csv(os, plan);
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("x0,kind\n", 0), 0u);
  EXPECT_NE(s.find("interior"), std::string::npos);
  EXPECT_NE(s.find(",neumann"), std::string::npos);
  EXPECT_NE(s.find(",dirichlet"), std::string::npos);
}

class PoissonSystem : public ::testing::Test {
 protected:
  ProblemSpec problem = make_problem("poisson1d");
  NetworkShape shape{{1, 1, 1}, 1, Activation::Sin};
  ResidualSystem sys{problem, shape, build_plan(problem, UniformGrid{0.01}, 0, 4)};
};

TEST_F(PoissonSystem, Counts) {
  EXPECT_EQ(sys.rows(), 101u);
  EXPECT_EQ(sys.unknowns(), 4u);
  EXPECT_EQ(sys.interior_rows(), 99u);
}

TEST_F(PoissonSystem, ExactSolutionRowsVanish) {
  const DenseVector f = sys.eval_all(exact_theta());
  EXPECT_LE(f.lpNorm<Eigen::Infinity>(), 1e-9);
  const std::vector<std::size_t> rows{0, 50, 99, 100};
  EXPECT_LE(sys.eval_rows(exact_theta(), rows).lpNorm<Eigen::Infinity>(), 1e-9);
}

TEST_F(PoissonSystem, DirichletRowOfZeroNetwork) {
  const std::vector<std::size_t> rows{99, 100};
  EXPECT_EQ(sys.eval_rows(DenseVector::Zero(4), rows).norm(), 0.0);
}

TEST_F(PoissonSystem, EvalAllMatchesEvalRows) {
  const DenseVector theta = random_normal_theta(4, 0.0, 1.0, 4);
  std::vector<std::size_t> all(sys.rows());
  std::iota(all.begin(), all.end(), 0);
  EXPECT_LE((sys.eval_all(theta) - sys.eval_rows(theta, all)).norm(), 1e-12);
}

TEST_F(PoissonSystem, OutOfRangeRows) {
  const std::vector<std::size_t> bad{101};
  EXPECT_THROW(sys.eval_rows(exact_theta(), bad), IndexOutOfRange);
  EXPECT_THROW(sys.eval_jacobian_rows(exact_theta(), bad), IndexOutOfRange);
}

TEST_F(PoissonSystem, DuplicatedRowsGiveIdenticalJacobianRows) {
  const std::vector<std::size_t> rows{7, 7, 100};
  const DenseMatrix j = sys.eval_jacobian_rows(random_normal_theta(4, 0.0, 1.0, 2), rows);
  EXPECT_EQ(j.row(0), j.row(1));
}

TEST_F(PoissonSystem, RowsWithJacobianAgree) {
  const DenseVector theta = random_normal_theta(4, 0.0, 1.0, 12);
  const std::vector<std::size_t> rows{3, 40, 100};
  const auto [v, j] = sys.eval_rows_with_jacobian(theta, rows);
  EXPECT_LE((v - sys.eval_rows(theta, rows)).norm(), 1e-13);
  EXPECT_LE((j - sys.eval_jacobian_rows(theta, rows)).norm(), 1e-13);
}

TEST(ResidualSystem, TwoComponentRowLayout) {
  const ProblemSpec p = make_problem("gray_scott", {1, false});
  const NetworkShape s{{1, 3, 1}, 2, Activation::Sin};
  const ResidualSystem sys(p, s, build_plan(p, UniformGrid{0.1}, 0, s.size()));
  EXPECT_EQ(sys.rows(), 22u);
  EXPECT_EQ(sys.interior_rows(), 18u);
  EXPECT_EQ(sys.row_spec(9).second.component, 1u);
  EXPECT_EQ(sys.row_spec(18).second.kind, RowKind::NeumannBoundary);
  EXPECT_EQ(sys.row_spec(21).second.component, 1u);
}

TEST(ResidualSystem, JacobianMatchesFiniteDifference) {
  const ProblemSpec p = make_problem("poisson2d");
  const NetworkShape s{{2, 3, 1}, 1, Activation::Sin};
  const ResidualSystem sys(p, s, build_plan(p, UniformGrid{0.5}, 0, s.size()));
  DenseVector theta = random_normal_theta(s.size(), 0.0, 1.0, 19);
  std::vector<std::size_t> all(sys.rows());
  std::iota(all.begin(), all.end(), 0);
  const DenseMatrix j = sys.eval_jacobian_rows(theta, all);
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    const double t0 = theta(k);
    theta(k) = t0 + 1e-6;
    const DenseVector fp = sys.eval_all(theta);
    theta(k) = t0 - 1e-6;
    const DenseVector fm = sys.eval_all(theta);
    theta(k) = t0;
    EXPECT_LE((j.col(k) - (fp - fm) / 2e-6).norm(), 1e-6 * std::max(1.0, j.col(k).norm()));
  }
}

TEST(ResidualSystem, SetParameterValidatesName) {
  const ProblemSpec p = make_problem("burgers1d");
  const NetworkShape s{{1, 2, 1}, 1, Activation::Sin};
  ResidualSystem sys(p, s, build_plan(p, UniformGrid{0.1}, 0, s.size()));
  sys.set_parameter("epsilon", 0.5);
  EXPECT_EQ(sys.params().get("epsilon"), 0.5);
  EXPECT_THROW(sys.set_parameter("lambda", 1.0), ConfigError);
}

}  // namespace
}  // namespace rnewton
