#pragma once

// Independent ground truth for the Bratu-type problem u'' = -lambda (1 + u^p),
// u'(0) = 0, u(1) = 0: the shooting function
//   G(u0) = int_0^u0 ds / sqrt(F(u0) - F(s)) - sqrt(2),
// its roots, and the solution profile behind each root.
//
// With s = u0 (1 - t^2) the integrable singularity at s = u0 disappears:
//   G(u0) = int_0^1 2 sqrt(u0) / sqrt(lambda Q(u0, s(t))) dt - sqrt(2),
//   Q(u0, s) = 1 + (u0^(p+1) - s^(p+1)) / ((p+1)(u0 - s)).

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include "rnewton/errors.hpp"

namespace rnewton {

inline constexpr double kShootingUpper = 50.0;
inline constexpr double kQuadratureTol = 1e-8;
/// A maximum of G within this of zero is treated as a double root.
inline constexpr double kDoubleRootTol = 1e-8;
/// Two roots closer than this are reported as one double root.
inline constexpr double kDoubleRootSeparation = 1e-2;

namespace detail {

// (u0^(p+1) - s^(p+1)) / (u0 - s) without cancellation.
inline double power_quotient(double u0, double s, int p) {
  double sum = 0.0, a = 1.0;
  for (int j = 0; j <= p; ++j) {
    double term = a;
    for (int k = 0; k < p - j; ++k) term *= s;
    sum += term;
    a *= u0;
  }
  return sum;
}

}  // namespace detail

inline double shooting_function(double u0, double lambda, int p) {
  if (!(u0 > 0.0) || !(lambda > 0.0)) throw QuadratureFailure("shooting function needs u0 > 0 and lambda > 0");
  auto integrand = [&](double t) {
    const double s = u0 * (1.0 - t * t);
    const double q = 1.0 + detail::power_quotient(u0, s, p) / static_cast<double>(p + 1);
    return 2.0 * std::sqrt(u0) / std::sqrt(lambda * q);
  };
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, 1.0, 15,
                                                                                      1e-12, &error);
  if (!std::isfinite(value) || error > kQuadratureTol) {
    throw QuadratureFailure("shooting integral did not reach the 1e-8 tolerance");
  }
  return value - std::numbers::sqrt2;
}

namespace detail {

inline double bisect_root(double lo, double hi, double lambda, int p) {
  auto g = [&](double u) { return shooting_function(u, lambda, p); };
  auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-13 * std::max(1.0, std::abs(a)); };
  const auto [a, b] = boost::math::tools::bisect(g, lo, hi, tol);
  return 0.5 * (a + b);
}

}  // namespace detail

/// Location and value of the maximum of G on (0, kShootingUpper].
inline std::pair<double, double> shooting_maximum(double lambda, int p) {
  // Log-spaced scan, then Brent refinement around the best sample.
  const int n = 400;
  const double lo = 1e-6;
  std::vector<double> grid(n);
  double best_u = lo, best_g = -1e300;
  std::size_t best_i = 0;
  for (int i = 0; i < n; ++i) {
    grid[static_cast<std::size_t>(i)] = lo * std::pow(kShootingUpper / lo, static_cast<double>(i) / (n - 1));
    const double g = shooting_function(grid[static_cast<std::size_t>(i)], lambda, p);
    if (g > best_g) {
      best_g = g;
      best_u = grid[static_cast<std::size_t>(i)];
      best_i = static_cast<std::size_t>(i);
    }
  }
  const double a = grid[best_i == 0 ? 0 : best_i - 1];
  const double b = grid[std::min<std::size_t>(best_i + 1, n - 1)];
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::brent_find_minima(
      [&](double u) { return -shooting_function(u, lambda, p); }, a, b, 40, iters);
  if (-r.second > best_g) return {r.first, -r.second};
  return {best_u, best_g};
}

/// All roots u0 of G in (0, kShootingUpper], ascending. Near the fold the
/// two roots merge into one double root at the maximizer of G; lambda = 0
/// gives no roots.
inline std::vector<double> shooting_roots(double lambda, int p = 4) {
  if (lambda < 0.0) throw QuadratureFailure("shooting_roots needs lambda >= 0");
  if (lambda == 0.0) return {};
  const auto [u_max, g_max] = shooting_maximum(lambda, p);
  if (g_max < -kDoubleRootTol) return {};
  if (g_max <= kDoubleRootTol) return {u_max};
  std::vector<double> roots;
  // G tends to -sqrt(2) as u0 -> 0, so the left bracket always changes sign.
  const double tiny = 1e-10;
  if (shooting_function(tiny, lambda, p) < 0.0) roots.push_back(detail::bisect_root(tiny, u_max, lambda, p));
  if (shooting_function(kShootingUpper, lambda, p) < 0.0) {
    roots.push_back(detail::bisect_root(u_max, kShootingUpper, lambda, p));
  }
  if (roots.size() == 2 && roots[1] - roots[0] < kDoubleRootSeparation) return {u_max};
  return roots;
}

/// Fold parameter: bisection on whether any root exists, to width `tol`.
inline std::pair<double, double> bracket_fold(double lo, double hi, int p = 4, double tol = 1e-4) {
  if (shooting_roots(lo, p).empty() || !shooting_roots(hi, p).empty()) {
    throw QuadratureFailure("fold bracket needs roots at lo and none at hi");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (shooting_roots(mid, p).empty() ? hi : lo) = mid;
  }
  return {lo, hi};
}

/// Profile u(x) on a uniform grid of `intervals` cells over [0, 1], from
/// u(0) = u0, u'(0) = 0 by classical RK4 with `substeps` steps per cell.
inline std::vector<double> bratu_profile(double u0, double lambda, int p, std::size_t intervals,
                                         std::size_t substeps = 8) {
  std::vector<double> out{u0};
  out.reserve(intervals + 1);
  double u = u0, v = 0.0;
  const double h = 1.0 / static_cast<double>(intervals * substeps);
  auto acc = [&](double w) { return -lambda * (1.0 + std::pow(w, p)); };
  for (std::size_t i = 0; i < intervals; ++i) {
    for (std::size_t k = 0; k < substeps; ++k) {
      const double k1u = v, k1v = acc(u);
      const double k2u = v + 0.5 * h * k1v, k2v = acc(u + 0.5 * h * k1u);
      const double k3u = v + 0.5 * h * k2v, k3v = acc(u + 0.5 * h * k2u);
      const double k4u = v + h * k3v, k4v = acc(u + h * k3u);
      u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
      v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    out.push_back(u);
  }
  return out;
}

}  // namespace rnewton
