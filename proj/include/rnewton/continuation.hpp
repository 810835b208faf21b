#pragma once

// Parameter tracking: solve a problem family along an explicit schedule,
// warm-starting from the previous solution or restarting from a fresh
// random draw at every value. Also locates shocks in the solutions.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rnewton/errors.hpp"
#include "rnewton/init.hpp"
#include "rnewton/network.hpp"
#include "rnewton/problem.hpp"
#include "rnewton/reference.hpp"
#include "rnewton/residual.hpp"
#include "rnewton/solver.hpp"

namespace rnewton {

struct WarmStart {};

struct RandomRestart {
  std::uint64_t seed = 0;
  double mean = 0.0;
  double stddev = 1.0;
};

using InitPolicy = std::variant<WarmStart, RandomRestart>;

struct TrackSchedule {
  std::string parameter;
  std::vector<double> values;
  InitPolicy policy = WarmStart{};
};

/// Subset-Jacobian condition numbers above this are flagged in reports.
inline constexpr double kIllConditioned = 1e8;

struct TrackEntry {
  double value = 0.0;
  DenseVector start_theta;
  SolveReport report;
  std::optional<double> error;
  bool ill_conditioned = false;
};

struct TrackReport {
  std::string parameter;
  std::vector<TrackEntry> entries;
};

/// Runs one solve per schedule value on a fixed sample plan. The solver
/// seed of value k is derive_seed(cfg.seed, k).
inline TrackReport track(const ProblemSpec& problem, const TrackSchedule& schedule, const NetworkShape& shape,
                         const SamplePlan& plan, const InitSpec& base_init, const SolverConfig& cfg) {
  if (schedule.values.empty()) throw ConfigError("track schedule has no values");
  if (!problem.params.has(schedule.parameter)) {
    throw ConfigError("problem '" + problem.name + "' has no parameter '" + schedule.parameter + "'");
  }
  ResidualSystem sys(problem, shape, plan);
  TrackReport out;
  out.parameter = schedule.parameter;
  DenseVector previous;
  for (std::size_t k = 0; k < schedule.values.size(); ++k) {
    sys.set_parameter(schedule.parameter, schedule.values[k]);
    TrackEntry entry;
    entry.value = schedule.values[k];
    if (const auto* rr = std::get_if<RandomRestart>(&schedule.policy)) {
      entry.start_theta = random_normal_theta(shape.size(), rr->mean, rr->stddev, derive_seed(rr->seed, k));
    } else if (k > 0 && previous.allFinite()) {
      entry.start_theta = previous;
    } else {
      entry.start_theta = initialize(base_init, shape).theta;
    }
    SolverConfig step_cfg = cfg;
    step_cfg.seed = derive_seed(cfg.seed, k);
    entry.report = solve(sys, entry.start_theta, step_cfg);
    previous = entry.report.final_theta;
    entry.ill_conditioned = entry.report.final_condition > kIllConditioned;
    if (problem.reference.kind != ReferenceKind::None && entry.report.final_theta.allFinite()) {
      try {
        entry.error = reference_error(sys.network(entry.report.final_theta), problem, sys.params());
      } catch (const NoReference&) {
        entry.error.reset();
      }
    }
    out.entries.push_back(std::move(entry));
  }
  return out;
}

/// Zero crossing of u on [lo, hi] at the steepest interior sign change,
/// refined by bisection. A margin of 2% at each end is skipped because the
/// boundary conditions pin u to zero there.
inline double shock_location(const std::function<double(double)>& u, double lo, double hi,
                             std::size_t grid = 4000) {
  const double margin = 0.02 * (hi - lo);
  const double a = lo + margin, b = hi - margin;
  const double h = (b - a) / static_cast<double>(grid);
  std::optional<std::size_t> best;
  double best_jump = 0.0;
  double prev = u(a);
  for (std::size_t i = 1; i <= grid; ++i) {
    const double cur = u(a + h * static_cast<double>(i));
    if ((prev > 0.0 && cur < 0.0) || (prev < 0.0 && cur > 0.0)) {
      const double jump = std::abs(cur - prev);
      if (jump > best_jump) {
        best_jump = jump;
        best = i;
      }
    }
    prev = cur;
  }
  if (!best) throw NoShock("no interior sign change found");
  double left = a + h * static_cast<double>(*best - 1), right = a + h * static_cast<double>(*best);
  const bool left_positive = u(left) > 0.0;
  for (int it = 0; it < 60 && right - left > 1e-14 * (1.0 + std::abs(left)); ++it) {
    const double mid = 0.5 * (left + right);
    ((u(mid) > 0.0) == left_positive ? left : right) = mid;
  }
  return 0.5 * (left + right);
}

/// Shock of a 1D network on [lo, hi], or of a 2D network along the
/// diagonal of the square box (returned as arc length from the corner).
inline double shock_location(const NetworkParams& net, const BoxDomain& box) {
  if (box.lo.size() == 1) {
    return shock_location([&](double x) { return forward<double>(net, 0, std::array{x}).front(); }, box.lo[0],
                          box.hi[0]);
  }
  if (box.lo.size() == 2) {
    const double len = std::numbers::sqrt2 * (box.hi[0] - box.lo[0]);
    return shock_location(
        [&](double s) {
          const double c = box.lo[0] + s / std::numbers::sqrt2;
          return forward<double>(net, 0, std::array{c, c}).front();
        },
        0.0, len);
  }
  throw ShapeMismatch("shock_location supports 1D boxes and 2D diagonals");
}

}  // namespace rnewton
