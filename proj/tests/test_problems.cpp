#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>

#include "rnewton/rnewton.hpp"

namespace rnewton {
namespace {

constexpr double kPi = std::numbers::pi;

NetworkParams one_node(double w1, double b1, double w2, double b2) {
  return NetworkParams({{1, 1, 1}, 1, Activation::Sin}, (DenseVector(4) << w1, b1, w2, b2).finished());
}

double interior_at_reference(const ProblemSpec& p, std::span<const double> x, const Parameters& params) {
  const FieldInputs in = constant_inputs(p.reference.fields(x, params), p.spatial_dim);
  return p.interior(in, x, 0, params).value;
}

TEST(Catalog, NamesAndErrors) {
  EXPECT_EQ(catalog().size(), 7u);
  for (const auto& name : problem_names()) EXPECT_EQ(make_problem(name).name, name);
  EXPECT_THROW(make_problem("heat"), ConfigError);
  EXPECT_THROW(make_problem("laplace_ball", {1, false}), ConfigError);
  EXPECT_THROW(make_problem("gray_scott", {3, false}), ConfigError);
}

TEST(Catalog, ComponentsAndDimensions) {
  EXPECT_EQ(make_problem("gray_scott").components, 2u);
  EXPECT_EQ(make_problem("gray_scott", {2, false}).spatial_dim, 2u);
  EXPECT_EQ(make_problem("laplace_ball", {4, false}).spatial_dim, 4u);
  EXPECT_EQ(make_problem("burgers1d").continuation_parameter, "epsilon");
  EXPECT_EQ(make_problem("bratu_family").params.get("lambda"), 1.2);
}

TEST(References, ClosedFormValues) {
  const std::array<double, 1> quarter{0.25};
  EXPECT_NEAR(make_problem("poisson1d").reference.fields(quarter, {}).value[0], 1.0, 1e-15);
  const std::array<double, 2> p{kPi / 2.0, 0.0};
  EXPECT_NEAR(make_problem("poisson2d").reference.fields(p, {}).value[0], 1.0, 1e-15);
  const std::array<double, 2> origin{0.0, 0.0};
  EXPECT_NEAR(make_problem("laplace_ball").reference.fields(origin, {}).value[0], 10.0 / 9.0, 1e-15);
  const std::array<double, 3> pole{0.0, 0.0, 1.0};
  EXPECT_NEAR(make_problem("laplace_ball", {3, false}).reference.fields(pole, {}).value[0], 1.0, 1e-15);
}

TEST(References, SatisfyTheirEquations) {
  for (const char* name : {"poisson1d", "poisson2d", "laplace_ball"}) {
    const ProblemSpec p = make_problem(name);
    for (double t : {0.1, 0.37, 0.6}) {
      std::vector<double> x(p.spatial_dim, t);
      EXPECT_NEAR(interior_at_reference(p, x, p.params), 0.0, 1e-12) << name;
    }
  }
  // The entropy profile solves the inviscid equation away from the shock.
  const ProblemSpec b = make_problem("burgers1d");
  for (double t : {0.3, 1.2, 2.0, 2.9}) {
    const std::array<double, 1> x{t};
    EXPECT_NEAR(interior_at_reference(b, x, {{"epsilon", 0.0}}), 0.0, 1e-14);
  }
}

TEST(References, EntropyProfileJumps) {
  const auto& f = make_problem("burgers1d").reference.fields;
  const std::array<double, 1> l{kPi / 2.0 - 1e-9}, r{kPi / 2.0 + 1e-9};
  EXPECT_NEAR(f(l, {}).value[0], 1.0, 1e-12);
  EXPECT_NEAR(f(r, {}).value[0], -1.0, 1e-12);
}

TEST(Oracle, BratuRootsAtTwelveTenths) {
  const auto roots = shooting_roots(1.2);
  ASSERT_EQ(roots.size(), 2u);
  EXPECT_NEAR(roots[0], 0.6750776299, 1e-8);
  EXPECT_NEAR(roots[1], 1.1004133969, 1e-8);
}

TEST(Oracle, FoldMergesRoots) {
  const auto [lo, hi] = bracket_fold(1.2, 1.4, 4, 1e-7);
  EXPECT_NEAR(0.5 * (lo + hi), 1.3010813, 1e-6);
  const auto merged = shooting_roots(1.30108);
  ASSERT_EQ(merged.size(), 1u);
  EXPECT_NEAR(merged[0], 0.8766425, 1e-6);
  EXPECT_TRUE(shooting_roots(1.302).empty());
  EXPECT_EQ(shooting_roots(1.3).size(), 2u);
}

TEST(Oracle, EdgeCases) {
  EXPECT_TRUE(shooting_roots(0.0).empty());
  EXPECT_THROW(shooting_roots(-1.0), QuadratureFailure);
  EXPECT_THROW(bracket_fold(1.35, 1.4), QuadratureFailure);
}

TEST(Oracle, ProfileHitsBoundary) {
  const auto prof = bratu_profile(0.6750776299, 1.2, 4, 1000);
  ASSERT_EQ(prof.size(), 1001u);
  EXPECT_EQ(prof.front(), 0.6750776299);
  EXPECT_NEAR(prof.back(), 0.0, 1e-8);
}

TEST(ReferenceError, ExactAndShifted) {
  const ProblemSpec p = make_problem("poisson1d");
  EXPECT_LT(reference_error(one_node(2.0 * kPi, 0.0, 1.0, 0.0), p), 1e-12);
  EXPECT_NEAR(reference_error(one_node(2.0 * kPi, 0.0, 1.0, 0.3), p), 0.3, 1e-12);
  EXPECT_NEAR(reference_error(one_node(0.0, 0.0, 0.0, 0.0), p), std::sqrt(0.5), 1e-9);
}

TEST(ReferenceError, BratuUsesNearestBranch) {
  const ProblemSpec p = make_problem("bratu_family");
  // A constant equal to the lower root's u(0) is closer to the lower branch.
  const double e_low = reference_error(one_node(0.0, 0.0, 0.0, 0.6750776299), p);
  const double e_high = reference_error(one_node(0.0, 0.0, 0.0, 1.1004133969), p);
  EXPECT_GT(e_low, 0.0);
  EXPECT_LT(e_low, 0.6750776299);
  EXPECT_LT(e_high, 1.1004133969);
  Parameters none = p.params;
  none.set("lambda", 1.5);
  EXPECT_THROW(reference_error(one_node(0, 0, 0, 0), p, none), NoReference);
  EXPECT_THROW(reference_error(one_node(0, 0, 0, 0), make_problem("gray_scott")), NoReference);
}

TEST(ReferenceError, BallMonteCarloIsDeterministic) {
  const ProblemSpec p = make_problem("laplace_ball", {3, false});
  const NetworkParams net({{3, 2, 1}, 1, Activation::Sin}, random_normal_theta(11, 0.0, 1.0, 5));
  EXPECT_EQ(reference_error(net, p), reference_error(net, p));
  // u = 1 differs from the reference by (1 - r^3) / 12.
  const NetworkParams one({{3, 1, 1}, 1, Activation::Sin}, (DenseVector(6) << 0, 0, 0, 0, 0, 1).finished());
  // integral over the unit 3-ball of ((1 - r^3)/12)^2 = 4 pi (1/3 - 1/3 + 1/9) / 144
  const double exact = std::sqrt(4.0 * kPi * (1.0 / 3.0 - 2.0 / 6.0 + 1.0 / 9.0) / 144.0);
  EXPECT_NEAR(reference_error(one, p), exact, 0.02 * exact);
}

TEST(PatternDistance, SelfAndReflection) {
  const BoxDomain unit{{0.0}, {1.0}};
  const NetworkParams a = one_node(3.0, 0.2, 1.0, 0.0);
  const NetworkParams mirrored = one_node(-3.0, 3.2, 1.0, 0.0);
  EXPECT_EQ(pattern_distance(a, a, unit), 0.0);
  EXPECT_LT(pattern_distance(a, mirrored, unit), 1e-12);
  EXPECT_NEAR(pattern_distance(a, one_node(3.0, 0.2, 1.0, 0.5), unit), 0.5, 1e-12);
  EXPECT_THROW(pattern_distance(a, a, unit, 1), BadSize);
}

TEST(PatternDistance, SquareSymmetries) {
  const BoxDomain sq{{0.0, 0.0}, {1.0, 1.0}};
  const NetworkShape s{{2, 1, 1}, 1, Activation::Sin};
  // sin(2x + 0.3) and sin(2y + 0.3) are related by the diagonal reflection.
  const NetworkParams a(s, (DenseVector(5) << 2.0, 0.0, 0.3, 1.0, 0.0).finished());
  const NetworkParams b(s, (DenseVector(5) << 0.0, 2.0, 0.3, 1.0, 0.0).finished());
  EXPECT_LT(pattern_distance(a, b, sq, 21), 1e-12);
}

TEST(Collocation, ReducedFormFrozenValues) {
  const auto rows = collocation_failure_demo(CollocationForm::Reduced);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].label, "CL1");
  EXPECT_EQ(rows[2].x2, 0.2);
  EXPECT_NEAR(rows[0].w1, -12.95874989, 1e-7);
  EXPECT_NEAR(rows[0].b1, 8.05017127, 1e-7);
  EXPECT_NEAR(rows[0].l2_error, 0.7946125, 1e-6);
  EXPECT_NEAR(rows[1].w1, 10.12593713, 1e-7);
  EXPECT_NEAR(rows[1].b1, -3.49217224, 1e-7);
  EXPECT_NEAR(rows[1].l2_error, 0.7724717, 1e-6);
  EXPECT_NEAR(rows[2].w1, -6.0 * kPi, 1e-9);
  EXPECT_NEAR(rows[2].l2_error, 0.7295307, 1e-6);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.converged);
    EXPECT_LT(r.residual, 1e-10);
  }
}

TEST(Collocation, FullFormRecoversSolutionForThirdPair) {
  const auto rows = collocation_failure_demo(CollocationForm::Full);
  EXPECT_NEAR(rows[2].w1, 2.0 * kPi, 1e-9);
  EXPECT_NEAR(rows[2].b1, -kPi, 1e-9);
  EXPECT_NEAR(rows[2].w2, -1.0, 1e-9);
  EXPECT_LT(rows[2].l2_error, 1e-9);
}

}  // namespace
}  // namespace rnewton
