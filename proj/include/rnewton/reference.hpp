#pragma once

// Error measures against reference solutions, pattern comparison up to
// symmetry, and the square-collocation failure demo.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "rnewton/dual.hpp"
#include "rnewton/errors.hpp"
#include "rnewton/linalg.hpp"
#include "rnewton/network.hpp"
#include "rnewton/oracles.hpp"
#include "rnewton/problem.hpp"
#include "rnewton/problems.hpp"

namespace rnewton {

inline constexpr double kTrapezoidStep1D = 1e-3;
inline constexpr double kTrapezoidStep2D = 1e-2;
inline constexpr std::size_t kMonteCarloPoints = 100000;
inline constexpr std::uint64_t kMonteCarloSeed = 20240531;

namespace detail {

inline double scalar_output(const NetworkParams& net, std::span<const double> x) {
  return forward<double>(net, 0, x).front();
}

inline std::size_t intervals_for(double lo, double hi, double step) {
  return static_cast<std::size_t>(std::max<long long>(1, std::llround((hi - lo) / step)));
}

// sqrt of the composite-trapezoid integral of err^2 over [lo, hi].
template <class Fn>
double trapezoid_l2_1d(double lo, double hi, double step, Fn&& err) {
  const std::size_t n = intervals_for(lo, hi, step);
  const double h = (hi - lo) / static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = i == n ? hi : lo + h * static_cast<double>(i);
    const double e = err(x);
    sum += (i == 0 || i == n ? 0.5 : 1.0) * e * e;
  }
  return std::sqrt(sum * h);
}

inline double ball_volume(std::size_t n) {
  const double nn = static_cast<double>(n);
  return std::pow(std::numbers::pi, nn / 2.0) / std::tgamma(nn / 2.0 + 1.0);
}

}  // namespace detail

/// L2 error of the first network output against the problem's reference.
/// Multi-root references (shooting oracle) use the nearest branch.
inline double reference_error(const NetworkParams& net, const ProblemSpec& problem, const Parameters& params) {
  const auto kind = problem.reference.kind;
  if (kind == ReferenceKind::None) throw NoReference("problem '" + problem.name + "' has no reference solution");

  if (kind == ReferenceKind::ShootingOracle) {
    const double lambda = params.get("lambda");
    const int p = static_cast<int>(std::lround(params.get("p")));
    const auto roots = shooting_roots(lambda, p);
    if (roots.empty()) throw NoReference("no solution exists for this lambda");
    const std::size_t n = detail::intervals_for(0.0, 1.0, kTrapezoidStep1D);
    double best = std::numeric_limits<double>::infinity();
    for (double u0 : roots) {
      const auto profile = bratu_profile(u0, lambda, p, n);
      const double e = detail::trapezoid_l2_1d(0.0, 1.0, kTrapezoidStep1D, [&](double x) {
        const auto i = static_cast<std::size_t>(std::llround(x * static_cast<double>(n)));
        return detail::scalar_output(net, std::array{x}) - profile[i];
      });
      best = std::min(best, e);
    }
    return best;
  }

  auto ref = [&](std::span<const double> x) { return problem.reference.fields(x, params).value.front(); };

  if (const auto* box = std::get_if<BoxDomain>(&problem.domain)) {
    if (problem.spatial_dim == 1) {
      return detail::trapezoid_l2_1d(box->lo[0], box->hi[0], kTrapezoidStep1D, [&](double x) {
        const std::array<double, 1> p{x};
        return detail::scalar_output(net, p) - ref(p);
      });
    }
    if (problem.spatial_dim == 2 && kind == ReferenceKind::EntropyProfile) {
      // Diagonal restriction x = y, parameterized by arc length s in [0, pi].
      const double len = std::numbers::sqrt2 * (box->hi[0] - box->lo[0]);
      return detail::trapezoid_l2_1d(0.0, len, kTrapezoidStep1D, [&](double s) {
        const double c = box->lo[0] + s / std::numbers::sqrt2;
        const std::array<double, 2> p{c, c};
        return detail::scalar_output(net, p) - ref(p);
      });
    }
    if (problem.spatial_dim == 2) {
      const std::size_t nx = detail::intervals_for(box->lo[0], box->hi[0], kTrapezoidStep2D);
      const std::size_t ny = detail::intervals_for(box->lo[1], box->hi[1], kTrapezoidStep2D);
      const double hx = (box->hi[0] - box->lo[0]) / static_cast<double>(nx);
      const double hy = (box->hi[1] - box->lo[1]) / static_cast<double>(ny);
      double sum = 0.0;
      for (std::size_t i = 0; i <= nx; ++i) {
        const double wx = (i == 0 || i == nx) ? 0.5 : 1.0;
        for (std::size_t j = 0; j <= ny; ++j) {
          const double wy = (j == 0 || j == ny) ? 0.5 : 1.0;
          const std::array<double, 2> p{box->lo[0] + hx * static_cast<double>(i),
                                        box->lo[1] + hy * static_cast<double>(j)};
          const double e = detail::scalar_output(net, p) - ref(p);
          sum += wx * wy * e * e;
        }
      }
      return std::sqrt(sum * hx * hy);
    }
    throw NoReference("no quadrature rule for boxes of dimension " + std::to_string(problem.spatial_dim));
  }

  // Unit ball: Monte Carlo with a fixed seed so errors are reproducible.
  const std::size_t n = problem.spatial_dim;
  std::mt19937_64 rng(kMonteCarloSeed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> x(n);
  double sum = 0.0;
  for (std::size_t k = 0; k < kMonteCarloPoints; ++k) {
    double norm2 = 0.0;
    for (auto& v : x) {
      v = gauss(rng);
      norm2 += v * v;
    }
    const double scale = std::pow(unif(rng), 1.0 / static_cast<double>(n)) / std::sqrt(norm2);
    for (auto& v : x) v *= scale;
    const double e = detail::scalar_output(net, x) - ref(x);
    sum += e * e;
  }
  return std::sqrt(detail::ball_volume(n) * sum / static_cast<double>(kMonteCarloPoints));
}

inline double reference_error(const NetworkParams& net, const ProblemSpec& problem) {
  return reference_error(net, problem, problem.params);
}

/// RMS distance between the first components of two networks on a uniform
/// grid over the box, minimized over the box's symmetry group (identity and
/// reflection in 1D, the eight symmetries of the square in 2D).
inline double pattern_distance(const NetworkParams& a, const NetworkParams& b, const BoxDomain& box,
                               std::size_t points_per_axis = 101) {
  const std::size_t d = box.lo.size();
  if (d != 1 && d != 2) throw ShapeMismatch("pattern_distance supports 1D and 2D boxes");
  if (points_per_axis < 2) throw BadSize("pattern_distance needs at least two points per axis");
  auto coord = [&](std::size_t axis, std::size_t i) {
    return box.lo[axis] + (box.hi[axis] - box.lo[axis]) * static_cast<double>(i) /
                              static_cast<double>(points_per_axis - 1);
  };
  auto reflect = [&](std::size_t axis, double v) { return box.lo[axis] + box.hi[axis] - v; };
  const std::size_t n_sym = d == 1 ? 2 : 8;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < n_sym; ++g) {
    double sum = 0.0;
    std::size_t count = 0;
    if (d == 1) {
      for (std::size_t i = 0; i < points_per_axis; ++i) {
        const double x = coord(0, i);
        const double y = g == 0 ? x : reflect(0, x);
        const double e = forward<double>(a, 0, std::array{x}).front() - forward<double>(b, 0, std::array{y}).front();
        sum += e * e;
        ++count;
      }
    } else {
      const bool swap = g & 4, flip_x = g & 1, flip_y = g & 2;
      for (std::size_t i = 0; i < points_per_axis; ++i) {
        for (std::size_t j = 0; j < points_per_axis; ++j) {
          const double x = coord(0, i), y = coord(1, j);
          double u = swap ? y : x, v = swap ? x : y;
          if (flip_x) u = reflect(0, u);
          if (flip_y) v = reflect(1, v);
          const double e = forward<double>(a, 0, std::array{x, y}).front() -
                           forward<double>(b, 0, std::array{u, v}).front();
          sum += e * e;
          ++count;
        }
      }
    }
    best = std::min(best, std::sqrt(sum / static_cast<double>(count)));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Square collocation for u'' = -4 pi^2 sin(2 pi x), u(0) = u(1) = 0 with the
// one-node network U = W2 sin(W1 x + b1) + b2 and two interior points.

enum class CollocationForm {
  /// Newton in (W1, b1) after eliminating W2, b2 with the first interior
  /// equation and the left boundary equation.
  Reduced,
  /// Newton in (W1, b1, W2, b2) on all four equations, starting from the
  /// same (W1, b1) with W2, b2 given by the elimination.
  Full,
};

struct CollocationRow {
  std::string label;
  double x1 = 0.0, x2 = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  double w1 = 0.0, b1 = 0.0, w2 = 0.0, b2 = 0.0;
  double residual = 0.0;  // max norm of the reduced system at (W1, b1)
  double l2_error = 0.0;
};

namespace detail {

inline constexpr double kFourPiSq = 4.0 * std::numbers::pi * std::numbers::pi;

template <class T>
std::array<T, 2> reduced_collocation(const T& w, const T& b, double x1, double x2) {
  using std::sin;
  const double c = kFourPiSq * std::sin(2.0 * std::numbers::pi * x1);
  const T s1 = sin(w * x1 + b);
  const T f2 = -c * sin(w * x2 + b) / s1 + kFourPiSq * std::sin(2.0 * std::numbers::pi * x2);
  const T f4 = c * sin(w + b) / (w * w * s1) - c * sin(b) / (w * w * s1);
  return {f2, f4};
}

template <class T>
std::array<T, 4> full_collocation(const std::array<T, 4>& t, double x1, double x2) {
  using std::sin;
  const T& w = t[0];
  const T& b = t[1];
  const T& w2 = t[2];
  const T& b2 = t[3];
  auto interior = [&](double x) {
    return -(w * w) * w2 * sin(w * x + b) + kFourPiSq * std::sin(2.0 * std::numbers::pi * x);
  };
  return {interior(x1), interior(x2), w2 * sin(b) + b2, w2 * sin(w + b) + b2};
}

inline std::pair<double, double> eliminated_outer(double w, double b, double x1) {
  const double w2 = kFourPiSq * std::sin(2.0 * std::numbers::pi * x1) / (w * w * std::sin(w * x1 + b));
  return {w2, -w2 * std::sin(b)};
}

template <std::size_t N, class Fn>
std::size_t newton_jet(std::array<double, N>& v, Fn&& system, std::size_t max_iters, double& final_norm) {
  for (std::size_t it = 0; it < max_iters; ++it) {
    std::array<Jet, N> vars;
    for (std::size_t k = 0; k < N; ++k) vars[k] = Jet::variable(v[k], static_cast<int>(k), static_cast<int>(N));
    const auto f = system(vars);
    DenseMatrix jac(N, N);
    DenseVector rhs(N);
    for (std::size_t i = 0; i < N; ++i) {
      rhs(static_cast<Eigen::Index>(i)) = f[i].value;
      for (std::size_t k = 0; k < N; ++k) {
        jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
            f[i].grad.size() ? f[i].grad(static_cast<Eigen::Index>(k)) : 0.0;
      }
    }
    final_norm = rhs.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(final_norm)) return it;
    if (final_norm < 1e-12) return it;
    DenseVector step;
    try {
      step = solve_square(jac, rhs);
    } catch (const SingularMatrix&) {
      return it;
    }
    for (std::size_t k = 0; k < N; ++k) v[k] -= step(static_cast<Eigen::Index>(k));
  }
  return max_iters;
}

}  // namespace detail

/// Plain Newton from (W1, b1) = (1, 1) for the three collocation pairs
/// {0.1, 0.8}, {0.8, 0.9} and {0.1, 0.2}.
inline std::vector<CollocationRow> collocation_failure_demo(CollocationForm form = CollocationForm::Reduced,
                                                            std::size_t max_iters = 200) {
  const std::array<std::array<double, 2>, 3> sets{{{0.1, 0.8}, {0.8, 0.9}, {0.1, 0.2}}};
  std::vector<CollocationRow> rows;
  for (std::size_t k = 0; k < sets.size(); ++k) {
    CollocationRow row;
    row.label = "CL" + std::to_string(k + 1);
    row.x1 = sets[k][0];
    row.x2 = sets[k][1];
    double norm = 0.0;
    if (form == CollocationForm::Reduced) {
      std::array<double, 2> v{1.0, 1.0};
      row.iterations = detail::newton_jet(
          v, [&](const std::array<Jet, 2>& t) { return detail::reduced_collocation(t[0], t[1], row.x1, row.x2); },
          max_iters, norm);
      row.w1 = v[0];
      row.b1 = v[1];
      std::tie(row.w2, row.b2) = detail::eliminated_outer(row.w1, row.b1, row.x1);
    } else {
      const auto [w2, b2] = detail::eliminated_outer(1.0, 1.0, row.x1);
      std::array<double, 4> v{1.0, 1.0, w2, b2};
      row.iterations = detail::newton_jet(
          v, [&](const std::array<Jet, 4>& t) { return detail::full_collocation(t, row.x1, row.x2); }, max_iters,
          norm);
      row.w1 = v[0];
      row.b1 = v[1];
      row.w2 = v[2];
      row.b2 = v[3];
    }
    const auto red = detail::reduced_collocation(row.w1, row.b1, row.x1, row.x2);
    row.residual = std::max(std::abs(red[0]), std::abs(red[1]));
    row.converged = std::isfinite(row.residual) && row.residual < 1e-8;
    row.l2_error = detail::trapezoid_l2_1d(0.0, 1.0, kTrapezoidStep1D, [&](double x) {
      return row.w2 * std::sin(row.w1 * x + row.b1) + row.b2 - std::sin(2.0 * std::numbers::pi * x);
    });
    rows.push_back(row);
  }
  return rows;
}

}  // namespace rnewton
