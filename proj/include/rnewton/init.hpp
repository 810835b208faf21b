#pragma once

// Initial parameter vectors: explicit values, seeded Gaussian draws, or a
// least-squares pre-fit of each branch to a target function.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "rnewton/autodiff.hpp"
#include "rnewton/errors.hpp"
#include "rnewton/linalg.hpp"
#include "rnewton/network.hpp"
#include "rnewton/problem.hpp"

namespace rnewton {

struct ExplicitInit {
  std::vector<double> theta;
};

struct RandomNormalInit {
  double mean = 0.0;
  double stddev = 1.0;
  std::uint64_t seed = 0;
};

/// offset + amplitude * prod_d cos(k_d pi x_d).
struct CosineTarget {
  double offset = 0.0;
  double amplitude = 0.0;
  std::vector<double> wavenumbers;

  double operator()(std::span<const double> x) const {
    double v = amplitude;
    for (std::size_t d = 0; d < x.size() && d < wavenumbers.size(); ++d) {
      v *= std::cos(wavenumbers[d] * std::numbers::pi * x[d]);
    }
    return offset + v;
  }
};

using TargetFunction = std::function<double(std::span<const double>)>;

/// Gauss-Newton fit of branch c to targets[c] on uniform random points in
/// `domain`, starting from a seeded Gaussian draw.
struct FunctionFitInit {
  std::vector<TargetFunction> targets;
  BoxDomain domain;
  std::size_t samples = 200;
  std::size_t max_iters = 50;
  std::uint64_t seed = 0;
  double start_stddev = 3.0;
  double rank_tol = 1e-4;  // relative SVD truncation of the Gauss-Newton steps
  std::string description = "function fit";
};

using InitSpec = std::variant<ExplicitInit, RandomNormalInit, FunctionFitInit>;

inline std::string describe(const InitSpec& spec) {
  std::ostringstream os;
  os.precision(17);
  if (const auto* e = std::get_if<ExplicitInit>(&spec)) {
    os << "explicit(" << e->theta.size() << " values)";
  } else if (const auto* r = std::get_if<RandomNormalInit>(&spec)) {
    os << "random_normal(mean=" << r->mean << ", stddev=" << r->stddev << ", seed=" << r->seed << ")";
  } else {
    const auto& f = std::get<FunctionFitInit>(spec);
    os << f.description << "(samples=" << f.samples << ", max_iters=" << f.max_iters << ", seed=" << f.seed << ")";
  }
  return os.str();
}

inline DenseVector random_normal_theta(std::size_t n, double mean, double stddev, std::uint64_t seed) {
  if (!(stddev > 0.0)) throw ShapeMismatch("random initialization needs stddev > 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(mean, stddev);
  DenseVector t(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < t.size(); ++i) t(i) = dist(rng);
  return t;
}

/// Achieved RMS misfit of every branch after a function fit.
struct FitSummary {
  std::vector<double> rms;
};

namespace detail {

inline void fit_branch(NetworkParams& net, std::size_t branch, const std::vector<DenseVector>& pts,
                       const TargetFunction& target, std::size_t max_iters, double rank_tol, double& rms) {
  const auto P = static_cast<Eigen::Index>(net.shape.branch_size());
  const auto off = static_cast<Eigen::Index>(net.shape.weight_offset(branch, 0));
  const auto n = static_cast<Eigen::Index>(pts.size());
  DenseVector goal(n);
  for (Eigen::Index i = 0; i < n; ++i) goal(i) = target(std::span<const double>(pts[i].data(), pts[i].size()));

  auto misfit = [&](const NetworkParams& nn) {
    DenseVector r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      r(i) = forward<double>(nn, branch, std::span<const double>(pts[i].data(), pts[i].size())).front() - goal(i);
    }
    return r;
  };

  DenseVector r = misfit(net);
  for (std::size_t it = 0; it < max_iters; ++it) {
    DenseMatrix jac(n, P);
    for (Eigen::Index i = 0; i < n; ++i) {
      jac.row(i) = field_jet_tangents(net, branch, std::span<const double>(pts[i].data(), pts[i].size()))
                       .d_value.transpose();
    }
    const DenseVector step = solve_least_squares(jac, r, rank_tol);
    // Halve until the misfit decreases; stop when no decrease is found.
    double t = 1.0;
    bool improved = false;
    for (int h = 0; h < 30; ++h, t *= 0.5) {
      NetworkParams trial = net;
      trial.theta.segment(off, P) -= t * step;
      const DenseVector rt = misfit(trial);
      if (rt.allFinite() && rt.norm() < r.norm()) {
        net = std::move(trial);
        r = rt;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  rms = r.norm() / std::sqrt(static_cast<double>(n));
}

}  // namespace detail

inline NetworkParams initialize(const InitSpec& spec, const NetworkShape& shape, FitSummary* summary = nullptr) {
  shape.validate();
  const std::size_t n = shape.size();
  if (const auto* e = std::get_if<ExplicitInit>(&spec)) {
    if (e->theta.size() != n) {
      throw ShapeMismatch("explicit initial value has " + std::to_string(e->theta.size()) +
                          " entries, network needs " + std::to_string(n));
    }
    return NetworkParams(shape, Eigen::Map<const DenseVector>(e->theta.data(), static_cast<Eigen::Index>(n)));
  }
  if (const auto* r = std::get_if<RandomNormalInit>(&spec)) {
    return NetworkParams(shape, random_normal_theta(n, r->mean, r->stddev, r->seed));
  }
  const auto& f = std::get<FunctionFitInit>(spec);
  if (f.targets.size() != shape.branches) throw ShapeMismatch("function fit needs one target per branch");
  if (f.domain.lo.size() != shape.input_dim()) throw ShapeMismatch("fit domain dimension mismatch");
  if (f.samples == 0) throw ShapeMismatch("function fit needs sample points");
  NetworkParams net(shape, random_normal_theta(n, 0.0, f.start_stddev, f.seed));
  std::mt19937_64 rng(f.seed ^ 0x5DEECE66DULL);
  std::vector<DenseVector> pts;
  for (std::size_t i = 0; i < f.samples; ++i) {
    DenseVector x(static_cast<Eigen::Index>(shape.input_dim()));
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      std::uniform_real_distribution<double> u(f.domain.lo[static_cast<std::size_t>(k)],
                                               f.domain.hi[static_cast<std::size_t>(k)]);
      x(k) = u(rng);
    }
    pts.push_back(std::move(x));
  }
  FitSummary local;
  local.rms.resize(shape.branches);
  for (std::size_t b = 0; b < shape.branches; ++b) {
    detail::fit_branch(net, b, pts, f.targets[b], f.max_iters, f.rank_tol, local.rms[b]);
  }
  if (summary) *summary = std::move(local);
  return net;
}

}  // namespace rnewton
