#pragma once

// Spatial and parameter derivatives of the network.
//
// Spatial derivatives use Dual2 numbers: one forward pass per coordinate
// direction gives U, dU/dx_k and d^2U/dx_k^2. Parameter derivatives of
// those quantities come from an outer forward sweep over theta that carries
// the tangent matrices d(.)/d(theta) through every layer alongside the
// second-order spatial duals.

#include <cstddef>
#include <span>
#include <vector>

#include "rnewton/dual.hpp"
#include "rnewton/linalg.hpp"
#include "rnewton/network.hpp"
#include "rnewton/problem.hpp"

namespace rnewton {

/// U, grad U and Laplacian of one single-output branch at one point.
struct FieldJet {
  double value = 0.0;
  DenseVector grad;
  double lap = 0.0;
};

/// FieldJet plus derivatives with respect to the branch's own parameters.
struct FieldJetTangents : FieldJet {
  DenseVector d_value;    // P
  Eigen::MatrixXd d_grad; // dim x P
  DenseVector d_lap;      // P
};

/// Value-gradient pair for one residual row: the residual and its
/// derivative with respect to the full theta.
struct TapeGradient {
  double value = 0.0;
  DenseVector partials;
};

inline FieldJet field_jet(const NetworkParams& net, std::size_t branch, std::span<const double> x) {
  const std::size_t d = x.size();
  FieldJet out;
  out.grad = DenseVector::Zero(static_cast<Eigen::Index>(d));
  std::vector<Dual2<double>> xd(d);
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t j = 0; j < d; ++j) xd[j] = Dual2<double>(x[j], j == k ? 1.0 : 0.0, 0.0);
    const auto y = forward<Dual2<double>>(net, branch, std::span<const Dual2<double>>(xd));
    out.value = y.front().value;
    out.grad(static_cast<Eigen::Index>(k)) = y.front().first;
    out.lap += y.front().second;
  }
  if (d == 0) out.value = forward<double>(net, branch, x).front();
  return out;
}

/// Laplacian of output `branch` at x, summed one coordinate at a time.
inline double laplacian(const NetworkParams& net, std::span<const double> x, std::size_t branch = 0) {
  return field_jet(net, branch, x).lap;
}
inline double laplacian(const NetworkParams& net, const DenseVector& x, std::size_t branch = 0) {
  return laplacian(net, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), branch);
}

inline DenseVector spatial_gradient(const NetworkParams& net, std::span<const double> x,
                                    std::size_t branch = 0) {
  return field_jet(net, branch, x).grad;
}
inline DenseVector spatial_gradient(const NetworkParams& net, const DenseVector& x,
                                    std::size_t branch = 0) {
  return spatial_gradient(net, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                          branch);
}

namespace detail {

// Adds the explicit dependence of z = W a + b on W (and b when with_bias):
// row i of G gets v^T in the columns of W's row i.
inline void add_affine_partials(Eigen::MatrixXd& g, std::size_t offset, std::size_t n_out, std::size_t n_in,
                                const Eigen::VectorXd& v, bool with_bias) {
  for (std::size_t i = 0; i < n_out; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    g.block(row, static_cast<Eigen::Index>(offset + i * n_in), 1, static_cast<Eigen::Index>(n_in)) +=
        v.transpose();
    if (with_bias) g(row, static_cast<Eigen::Index>(offset + n_out * n_in + i)) += 1.0;
  }
}

}  // namespace detail

/// Value, gradient and Laplacian of a single-output branch together with
/// their derivatives with respect to that branch's parameters.
inline FieldJetTangents field_jet_tangents(const NetworkParams& net, std::size_t branch,
                                           std::span<const double> x) {
  const auto& widths = net.shape.layer_widths;
  const std::size_t d = x.size();
  const auto P = static_cast<Eigen::Index>(net.shape.branch_size());
  const std::size_t branch_offset = net.shape.weight_offset(branch, 0);
  if (d != widths.front()) throw ShapeMismatch("input has wrong dimension");

  // Spatial state: a, da/dx_k (columns), sum_k d^2a/dx_k^2.
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(d));
  Eigen::MatrixXd ap = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  Eigen::VectorXd lap = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  // Tangents with respect to theta; the input layer does not depend on it.
  Eigen::MatrixXd ga, gl;
  std::vector<Eigen::MatrixXd> gap(d);
  bool depends_on_theta = false;

  const std::size_t layers = net.shape.layers();
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t n_in = widths[l];
    const std::size_t n_out = widths[l + 1];
    const auto rows = static_cast<Eigen::Index>(n_out);
    const auto w = net.weights(branch, l);
    const auto b = net.bias(branch, l);
    const std::size_t offset = net.shape.weight_offset(branch, l) - branch_offset;

    Eigen::VectorXd z = w * a + b;
    Eigen::MatrixXd zp = w * ap;
    Eigen::VectorXd zl = w * lap;

    Eigen::MatrixXd gz, gzl;
    std::vector<Eigen::MatrixXd> gzp(d);
    if (depends_on_theta) {
      gz = w * ga;
      gzl = w * gl;
      for (std::size_t k = 0; k < d; ++k) gzp[k] = w * gap[k];
    } else {
      gz = Eigen::MatrixXd::Zero(rows, P);
      gzl = Eigen::MatrixXd::Zero(rows, P);
      for (std::size_t k = 0; k < d; ++k) gzp[k] = Eigen::MatrixXd::Zero(rows, P);
    }
    detail::add_affine_partials(gz, offset, n_out, n_in, a, true);
    for (std::size_t k = 0; k < d; ++k) {
      detail::add_affine_partials(gzp[k], offset, n_out, n_in, ap.col(static_cast<Eigen::Index>(k)), false);
    }
    if (depends_on_theta) detail::add_affine_partials(gzl, offset, n_out, n_in, lap, false);
    depends_on_theta = true;

    if (l + 1 == layers) {
      if (n_out != 1) throw ShapeMismatch("field_jet_tangents: branch output must be scalar");
      FieldJetTangents out;
      out.value = z(0);
      out.grad = zp.row(0).transpose();
      out.lap = zl(0);
      out.d_value = gz.row(0).transpose();
      out.d_lap = gzl.row(0).transpose();
      out.d_grad.resize(static_cast<Eigen::Index>(d), P);
      for (std::size_t k = 0; k < d; ++k) out.d_grad.row(static_cast<Eigen::Index>(k)) = gzp[k].row(0);
      return out;
    }

    Eigen::ArrayXd s0(rows), s1(rows), s2(rows), s3(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const auto dv = activation_derivatives(net.shape.activation, z(i));
      s0(i) = dv[0];
      s1(i) = dv[1];
      s2(i) = dv[2];
      s3(i) = dv[3];
    }
    const Eigen::ArrayXd q = zp.array().square().rowwise().sum();

    a = s0.matrix();
    ap = (zp.array().colwise() * s1).matrix();
    lap = (s2 * q + s1 * zl.array()).matrix();

    ga = s1.matrix().asDiagonal() * gz;
    gl = (s3 * q + s2 * zl.array()).matrix().asDiagonal() * gz + s1.matrix().asDiagonal() * gzl;
    for (std::size_t k = 0; k < d; ++k) {
      const Eigen::ArrayXd zk = zp.col(static_cast<Eigen::Index>(k)).array();
      gl += (2.0 * s2 * zk).matrix().asDiagonal() * gzp[k];
      gap[k] = (s2 * zk).matrix().asDiagonal() * gz + s1.matrix().asDiagonal() * gzp[k];
    }
  }
  throw ShapeMismatch("network has no layers");
}

/// Which kind of equation a residual row enforces.
enum class RowKind { Interior, DirichletBoundary, NeumannBoundary };

/// Identifies one residual equation at a point.
struct RowSpec {
  RowKind kind = RowKind::Interior;
  std::size_t component = 0;  // equation index for interior rows
  DenseVector normal;         // outward unit normal for Neumann rows
};

namespace detail {

inline FieldInputs seeded_inputs(const std::vector<FieldJet>& jets, std::size_t dim, bool seed) {
  FieldInputs in;
  in.dim = dim;
  const auto slots = static_cast<int>(FieldInputs::slots(jets.size(), dim));
  // Slot of (component c, field f) is c*(dim+2) + f with f = value, grad..., lap.
  int slot = 0;
  auto make = [&](double v) { return seed ? Jet::variable(v, slot++, slots) : Jet(v); };
  for (const auto& j : jets) {
    in.value.push_back(make(j.value));
    for (std::size_t k = 0; k < dim; ++k) in.grad.push_back(make(j.grad(static_cast<Eigen::Index>(k))));
    in.lap.push_back(make(j.lap));
  }
  return in;
}

}  // namespace detail

/// Residual value of one row, without derivatives.
inline double residual_value(const NetworkParams& net, std::span<const double> x, const RowSpec& row,
                             const ProblemSpec& problem, const Parameters& params) {
  const std::size_t dim = x.size();
  switch (row.kind) {
    case RowKind::Interior: {
      std::vector<FieldJet> jets;
      jets.reserve(problem.components);
      for (std::size_t c = 0; c < problem.components; ++c) jets.push_back(field_jet(net, c, x));
      const FieldInputs in = detail::seeded_inputs(jets, dim, false);
      return problem.interior(in, x, row.component, params).value;
    }
    case RowKind::DirichletBoundary:
      return forward<double>(net, row.component, x).front() -
             problem.boundary_target(x, row.component, params);
    case RowKind::NeumannBoundary: {
      const FieldJet j = field_jet(net, row.component, x);
      return j.grad.dot(row.normal) - problem.boundary_target(x, row.component, params);
    }
  }
  return 0.0;
}

/// Residual value of one row and its gradient with respect to all of theta.
inline TapeGradient residual_row_gradient(const NetworkParams& net, std::span<const double> x,
                                          const RowSpec& row, const ProblemSpec& problem,
                                          const Parameters& params) {
  const std::size_t dim = x.size();
  const auto P = static_cast<Eigen::Index>(net.shape.branch_size());
  TapeGradient out;
  out.partials = DenseVector::Zero(static_cast<Eigen::Index>(net.shape.size()));
  auto block = [&](std::size_t c) { return out.partials.segment(static_cast<Eigen::Index>(c) * P, P); };

  switch (row.kind) {
    case RowKind::Interior: {
      std::vector<FieldJetTangents> tangents;
      std::vector<FieldJet> jets;
      for (std::size_t c = 0; c < problem.components; ++c) {
        tangents.push_back(field_jet_tangents(net, c, x));
        jets.push_back(tangents.back());
      }
      const FieldInputs in = detail::seeded_inputs(jets, dim, true);
      const Jet r = problem.interior(in, x, row.component, params);
      out.value = r.value;
      if (r.grad.size() == 0) break;
      for (std::size_t c = 0; c < problem.components; ++c) {
        const auto base = static_cast<Eigen::Index>(c * (dim + 2));
        const auto& t = tangents[c];
        auto g = block(c);
        g += r.grad(base) * t.d_value;
        for (std::size_t k = 0; k < dim; ++k) {
          const auto kk = static_cast<Eigen::Index>(k);
          g += r.grad(base + 1 + kk) * t.d_grad.row(kk).transpose();
        }
        g += r.grad(base + 1 + static_cast<Eigen::Index>(dim)) * t.d_lap;
      }
      break;
    }
    case RowKind::DirichletBoundary: {
      const auto t = field_jet_tangents(net, row.component, x);
      out.value = t.value - problem.boundary_target(x, row.component, params);
      block(row.component) = t.d_value;
      break;
    }
    case RowKind::NeumannBoundary: {
      const auto t = field_jet_tangents(net, row.component, x);
      out.value = t.grad.dot(row.normal) - problem.boundary_target(x, row.component, params);
      block(row.component) = t.d_grad.transpose() * row.normal;
      break;
    }
  }
  return out;
}

}  // namespace rnewton
