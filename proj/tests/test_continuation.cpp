#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rnewton/rnewton.hpp"

namespace rnewton {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(ShockLocation, SteepSyntheticProfile) {
  auto u = [](double x) { return std::tanh(50.0 * (1.0 - x)) * std::sin(x); };
  EXPECT_NEAR(shock_location(u, 0.0, kPi), 1.0, 1e-10);
}

TEST(ShockLocation, PicksSteepestCrossing) {
  // Gentle crossing at 0.5, steep one at 2.0.
  auto u = [](double x) { return x < 1.25 ? 0.5 - x : std::tanh(40.0 * (x - 2.0)); };
  EXPECT_NEAR(shock_location(u, 0.0, kPi), 2.0, 1e-10);
}

TEST(ShockLocation, NetworkSignChange) {
  // -sin(x - 1) changes sign at x = 1 inside [0, pi].
  const NetworkParams net({{1, 1, 1}, 1, Activation::Sin}, (DenseVector(4) << 1.0, -1.0, -1.0, 0.0).finished());
  EXPECT_NEAR(shock_location(net, BoxDomain{{0.0}, {kPi}}), 1.0, 1e-10);
}

TEST(ShockLocation, NoSignChangeThrows) {
  EXPECT_THROW(shock_location([](double x) { return std::sin(x); }, 0.0, kPi), NoShock);
  const NetworkParams flat({{1, 1, 1}, 1, Activation::Sin}, (DenseVector(4) << 0.0, 0.0, 0.0, 2.0).finished());
  EXPECT_THROW(shock_location(flat, BoxDomain{{0.0}, {kPi}}), NoShock);
}

class BurgersTrack : public ::testing::Test {
 protected:
  ProblemSpec problem = make_problem("burgers1d");
  NetworkShape shape{{1, 2, 1}, 1, Activation::Sin};
  SamplePlan plan = build_plan(problem, UniformGrid{0.1}, 0, shape.size());
  SolverConfig cfg = [] {
    SolverConfig c;
    c.max_iters = 30;
    c.seed = 11;
    c.max_step = 1.0;
    return c;
  }();
};

TEST_F(BurgersTrack, SingleValueEqualsDirectSolve) {
  const InitSpec init = RandomNormalInit{0.0, 1.0, 3};
  const TrackReport t = track(problem, {"epsilon", {0.7}, WarmStart{}}, shape, plan, init, cfg);
  ASSERT_EQ(t.entries.size(), 1u);
  ResidualSystem sys(problem, shape, plan);
  sys.set_parameter("epsilon", 0.7);
  SolverConfig c = cfg;
  c.seed = derive_seed(cfg.seed, 0);
  const SolveReport direct = solve(sys, initialize(init, shape).theta, c);
  EXPECT_EQ(t.entries[0].report.final_theta, direct.final_theta);
  EXPECT_EQ(t.entries[0].report.iterations, direct.iterations);
  EXPECT_TRUE(t.entries[0].error.has_value());
}

TEST_F(BurgersTrack, WarmStartChainsSolutions) {
  const TrackReport t = track(problem, {"epsilon", {1.0, 0.5, 0.25}, WarmStart{}}, shape, plan,
                              RandomNormalInit{0.0, 1.0, 3}, cfg);
  ASSERT_EQ(t.entries.size(), 3u);
  EXPECT_EQ(t.parameter, "epsilon");
  for (std::size_t k = 1; k < 3; ++k) {
    EXPECT_EQ(t.entries[k].start_theta, t.entries[k - 1].report.final_theta);
    EXPECT_EQ(t.entries[k].value, (std::array<double, 3>{1.0, 0.5, 0.25})[k]);
  }
}

TEST_F(BurgersTrack, RandomRestartDrawsFreshStarts) {
  const TrackReport t = track(problem, {"epsilon", {1.0, 0.5}, RandomRestart{8, 0.0, 1.0}}, shape, plan,
                              RandomNormalInit{}, cfg);
  EXPECT_EQ(t.entries[1].start_theta, random_normal_theta(shape.size(), 0.0, 1.0, derive_seed(8, 1)));
}

TEST_F(BurgersTrack, ScheduleValidation) {
  EXPECT_THROW(track(problem, {"epsilon", {}, WarmStart{}}, shape, plan, RandomNormalInit{}, cfg), ConfigError);
  EXPECT_THROW(track(problem, {"lambda", {1.0}, WarmStart{}}, shape, plan, RandomNormalInit{}, cfg), ConfigError);
}

}  // namespace
}  // namespace rnewton
