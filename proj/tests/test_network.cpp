#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rnewton/init.hpp"
#include "rnewton/network.hpp"

namespace rnewton {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

NetworkParams exact_poisson() {
  DenseVector t(4);
  t << kTwoPi, 0.0, 1.0, 0.0;  // W1, b1, W2, b2
  return NetworkParams({{1, 1, 1}, 1, Activation::Sin}, t);
}

TEST(ParamCount, TableWidths) {
  EXPECT_EQ(param_count({1, 1, 1}), 4u);
  EXPECT_EQ(param_count({1, 10, 1}), 31u);
  EXPECT_EQ(param_count({2, 6, 1}), 25u);
  EXPECT_EQ(param_count({1, 2, 1}), 7u);
  EXPECT_THROW(param_count({3}), ShapeMismatch);
}

TEST(NetworkShape, Branches) {
  const NetworkShape s{{2, 10, 1}, 2, Activation::Sin};
  EXPECT_EQ(s.branch_size(), 41u);
  EXPECT_EQ(s.size(), 82u);
  EXPECT_EQ(s.weight_offset(1, 0), 41u);
  EXPECT_EQ(s.weight_offset(1, 1), 41u + 30u);
  EXPECT_THROW((NetworkShape{{1, 0, 1}, 1, Activation::Sin}.validate()), ShapeMismatch);
}

TEST(Evaluate, ExactPoissonSolution) {
  EXPECT_NEAR(evaluate(exact_poisson(), std::vector<double>{0.25})(0), 1.0, 1e-15);
}

TEST(Evaluate, ZeroThetaGivesZero) {
  const NetworkShape s{{2, 5, 3, 1}, 1, Activation::Tanh};
  const NetworkParams net(s, DenseVector::Zero(static_cast<Eigen::Index>(s.size())));
  EXPECT_EQ(evaluate(net, std::vector<double>{0.3, -1.7})(0), 0.0);
}

TEST(Evaluate, MatchesHandComposition) {
  const NetworkShape s{{2, 3, 4, 1}, 1, Activation::Sigmoid};
  const NetworkParams net(s, random_normal_theta(s.size(), 0.0, 1.0, 5));
  const auto& t = net.theta;
  auto sig = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  for (const auto& x : {std::vector<double>{0.1, 0.2}, {-1.0, 0.5}, {2.0, -0.3}}) {
    // Layer 1: W (3x2) at 0, b at 6; layer 2: W (4x3) at 9, b at 21; layer 3: W (1x4) at 25, b at 29.
    double h1[3], h2[4];
    for (int i = 0; i < 3; ++i) h1[i] = sig(t(2 * i) * x[0] + t(2 * i + 1) * x[1] + t(6 + i));
    for (int i = 0; i < 4; ++i) {
      double z = t(21 + i);
      for (int j = 0; j < 3; ++j) z += t(9 + 3 * i + j) * h1[j];
      h2[i] = sig(z);
    }
    double out = t(29);
    for (int j = 0; j < 4; ++j) out += t(25 + j) * h2[j];
    EXPECT_NEAR(evaluate(net, x)(0), out, 1e-14);
  }
}

TEST(Evaluate, BranchesAreIndependent) {
  const NetworkShape s{{1, 3, 1}, 2, Activation::Sin};
  DenseVector t = random_normal_theta(s.size(), 0.0, 1.0, 9);
  const NetworkParams net(s, t);
  const DenseVector before = evaluate(net, std::vector<double>{0.4});
  t.tail(static_cast<Eigen::Index>(s.branch_size())).setZero();
  const DenseVector after = evaluate(NetworkParams(s, t), std::vector<double>{0.4});
  EXPECT_EQ(before(0), after(0));
  EXPECT_EQ(after(1), 0.0);
}

TEST(NetworkParams, LengthChecked) {
  EXPECT_THROW(NetworkParams({{1, 2, 1}, 1, Activation::Sin}, DenseVector::Zero(6)), ShapeMismatch);
}

TEST(Activation, Names) {
  for (auto a : {Activation::Sin, Activation::Sigmoid, Activation::Tanh, Activation::Identity}) {
    EXPECT_EQ(activation_from_string(to_string(a)), a);
  }
  EXPECT_THROW(activation_from_string("relu"), ConfigError);
}

TEST(Initialize, ExplicitKeepsValues) {
  const std::vector<double> theta0{1, 1, 1, 1, 1, 1, 1};
  const auto net = initialize(ExplicitInit{theta0}, {{1, 2, 1}, 1, Activation::Sin});
  for (std::size_t i = 0; i < theta0.size(); ++i) EXPECT_EQ(net.theta(static_cast<Eigen::Index>(i)), theta0[i]);
  EXPECT_THROW(initialize(ExplicitInit{{1, 2}}, {{1, 2, 1}, 1, Activation::Sin}), ShapeMismatch);
}

TEST(Initialize, RandomNormalIsDeterministic) {
  const NetworkShape s{{1, 10, 1}, 1, Activation::Sin};
  const auto a = initialize(RandomNormalInit{0.0, 1.0, 42}, s);
  const auto b = initialize(RandomNormalInit{0.0, 1.0, 42}, s);
  const auto c = initialize(RandomNormalInit{0.0, 1.0, 43}, s);
  EXPECT_EQ(a.theta, b.theta);
  EXPECT_NE(a.theta, c.theta);
  EXPECT_THROW(initialize(RandomNormalInit{0.0, 0.0, 1}, s), ShapeMismatch);
}

TEST(Initialize, FunctionFitReachesCosineTarget) {
  FunctionFitInit f;
  f.targets = {CosineTarget{0.5, 0.3, {3.0}}, CosineTarget{0.5, -0.3, {3.0}}};
  f.domain = BoxDomain{{0.0}, {1.0}};
  f.seed = 1;
  FitSummary summary;
  const auto net = initialize(f, {{1, 10, 1}, 2, Activation::Sin}, &summary);
  ASSERT_EQ(summary.rms.size(), 2u);
  double worst = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double x = i / 100.0;
    const double target = 0.3 * std::cos(3.0 * std::numbers::pi * x) + 0.5;
    worst = std::max(worst, std::abs(evaluate(net, std::vector<double>{x})(0) - target));
  }
  EXPECT_LE(worst, 5e-2);
}

TEST(Initialize, FunctionFitNeedsOneTargetPerBranch) {
  FunctionFitInit f;
  f.targets = {CosineTarget{0.5, 0.3, {1.0}}};
  f.domain = BoxDomain{{0.0}, {1.0}};
  EXPECT_THROW(initialize(f, {{1, 4, 1}, 2, Activation::Sin}), ShapeMismatch);
}

TEST(Describe, MentionsSeed) {
  EXPECT_NE(describe(RandomNormalInit{0.0, 2.0, 17}).find("seed=17"), std::string::npos);
}

}  // namespace
}  // namespace rnewton
