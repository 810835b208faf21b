#pragma once

// Finite-difference cross-check of the spatial Laplacian and of residual
// rows' parameter gradients on random networks and points.

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "rnewton/rnewton.hpp"

namespace rnewton::testing {

struct FdCheck {
  std::size_t pairs = 0;
  double worst_laplacian = 0.0;  // relative
  double worst_jacobian = 0.0;   // relative, norm-wise per row
};

inline double relative(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8}); }

inline double central_laplacian(const NetworkParams& net, std::vector<double> x, double h) {
  const double u0 = evaluate(net, x)(0);
  double lap = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double xk = x[k];
    x[k] = xk + h;
    const double up = evaluate(net, x)(0);
    x[k] = xk - h;
    const double um = evaluate(net, x)(0);
    x[k] = xk;
    lap += (up - 2.0 * u0 + um) / (h * h);
  }
  return lap;
}

/// Central second differences at h and h/2 combined by Richardson
/// extrapolation, O(h^4) accurate.
inline double fd_laplacian(const NetworkParams& net, const std::vector<double>& x, double h) {
  return (4.0 * central_laplacian(net, x, 0.5 * h) - central_laplacian(net, x, h)) / 3.0;
}

/// `pairs` random (network, point) draws cycling through 1- and 2-hidden-
/// layer shapes, every smooth activation, and 1D/2D problems.
inline FdCheck run_fd_check(std::uint64_t seed, std::size_t pairs) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::array<Activation, 3> acts{Activation::Sin, Activation::Sigmoid, Activation::Tanh};
  const ProblemSpec burgers1 = make_problem("burgers1d");
  const ProblemSpec burgers2 = make_problem("burgers2d");
  Parameters eps;
  eps.set("epsilon", 0.3);
  FdCheck out;
  for (std::size_t i = 0; i < pairs; ++i) {
    const std::size_t dim = 1 + (i % 2);
    const bool deep = (i / 2) % 2 == 1;
    const Activation act = acts[(i / 4) % acts.size()];
    std::vector<std::size_t> widths{dim, 4};
    if (deep) widths.push_back(3);
    widths.push_back(1);
    const NetworkShape shape{widths, 1, act};
    const NetworkParams net(shape, random_normal_theta(shape.size(), 0.0, 1.0, rng()));
    std::vector<double> x(dim);
    for (auto& v : x) v = unit(rng);

    out.worst_laplacian = std::max(out.worst_laplacian, relative(laplacian(net, x), fd_laplacian(net, x, 2e-3)));

    const ProblemSpec& problem = dim == 1 ? burgers1 : burgers2;
    const RowSpec row{RowKind::Interior, 0, {}};
    const TapeGradient g = residual_row_gradient(net, x, row, problem, eps);
    DenseVector fd(g.partials.size());
    DenseVector theta = net.theta;
    const double h = 1e-6;
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      const double t0 = theta(k);
      theta(k) = t0 + h;
      const double fp = residual_value(NetworkParams(shape, theta), x, row, problem, eps);
      theta(k) = t0 - h;
      const double fm = residual_value(NetworkParams(shape, theta), x, row, problem, eps);
      theta(k) = t0;
      fd(k) = (fp - fm) / (2.0 * h);
    }
    const double rel = (g.partials - fd).norm() / std::max(fd.norm(), 1e-8);
    out.worst_jacobian = std::max(out.worst_jacobian, rel);
    ++out.pairs;
  }
  return out;
}

}  // namespace rnewton::testing
