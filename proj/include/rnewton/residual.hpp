#pragma once

// Sampling plans and the overdetermined residual system F(theta).
//
// Global row order: interior rows first, component-major (all interior
// points for equation 0, then equation 1, ...), then boundary rows,
// component-major as well.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rnewton/autodiff.hpp"
#include "rnewton/errors.hpp"
#include "rnewton/linalg.hpp"
#include "rnewton/network.hpp"
#include "rnewton/problem.hpp"

namespace rnewton {

struct UniformGrid {
  double step = 0.01;
};
struct RandomUniform {
  std::size_t count = 1000;
  double boundary_fraction = 0.2;
};
struct RandomBall {
  std::size_t count = 1000;
  double boundary_fraction = 0.2;
};
using Provenance = std::variant<UniformGrid, RandomUniform, RandomBall>;

struct BoundaryPoint {
  DenseVector x;
  BoundaryKind kind;
};

struct SamplePlan {
  std::vector<DenseVector> interior;
  std::vector<BoundaryPoint> boundary;
  std::uint64_t seed = 0;
  Provenance provenance;

  std::size_t points() const { return interior.size() + boundary.size(); }
};

namespace detail {

inline std::span<const double> as_span(const DenseVector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

inline BoundaryKind classify(const ProblemSpec& problem, const DenseVector& x, DenseVector normal) {
  BoundaryKind kind;
  kind.type = problem.classify_boundary ? problem.classify_boundary(as_span(x)) : BoundaryType::Dirichlet;
  kind.normal = std::move(normal);
  return kind;
}

// Outward normal of a box at a boundary point; corners use the normalized
// sum of the active face normals.
inline DenseVector box_normal(const BoxDomain& box, const DenseVector& x) {
  DenseVector n = DenseVector::Zero(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double scale = std::max(1.0, box.hi[i] - box.lo[i]) * 1e-12;
    if (std::abs(x(k) - box.lo[i]) <= scale) n(k) -= 1.0;
    if (std::abs(x(k) - box.hi[i]) <= scale) n(k) += 1.0;
  }
  const double len = n.norm();
  return len > 0 ? DenseVector(n / len) : n;
}

inline std::size_t grid_intervals(double lo, double hi, double step) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround((hi - lo) / step)));
}

inline void grid_plan(const ProblemSpec& problem, const BoxDomain& box, double step, SamplePlan& plan) {
  const std::size_t d = box.lo.size();
  std::vector<std::size_t> n(d);
  for (std::size_t k = 0; k < d; ++k) n[k] = grid_intervals(box.lo[k], box.hi[k], step);
  std::vector<std::size_t> idx(d, 0);
  while (true) {
    DenseVector x(static_cast<Eigen::Index>(d));
    bool on_boundary = false;
    for (std::size_t k = 0; k < d; ++k) {
      // Endpoints are set exactly so boundary coordinates equal lo/hi.
      x(static_cast<Eigen::Index>(k)) =
          idx[k] == n[k] ? box.hi[k]
                         : box.lo[k] + (box.hi[k] - box.lo[k]) * static_cast<double>(idx[k]) /
                                           static_cast<double>(n[k]);
      on_boundary = on_boundary || idx[k] == 0 || idx[k] == n[k];
    }
    if (on_boundary) {
      plan.boundary.push_back({x, classify(problem, x, box_normal(box, x))});
    } else {
      plan.interior.push_back(std::move(x));
    }
    // Odometer increment, last coordinate fastest.
    std::size_t k = d;
    while (k > 0) {
      --k;
      if (++idx[k] <= n[k]) break;
      idx[k] = 0;
      if (k == 0) return;
    }
    if (d == 0) return;
  }
}

inline std::size_t boundary_share(std::size_t count, double fraction) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(count) * fraction));
}

inline void random_box_plan(const ProblemSpec& problem, const BoxDomain& box, const RandomUniform& spec,
                            std::mt19937_64& rng, SamplePlan& plan) {
  const std::size_t d = box.lo.size();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t n_boundary = d == 1 ? 2 : boundary_share(spec.count, spec.boundary_fraction);
  const std::size_t n_interior = spec.count > n_boundary ? spec.count - n_boundary : 0;
  for (std::size_t i = 0; i < n_interior; ++i) {
    DenseVector x(static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k) {
      // Open interval keeps samples strictly inside.
      double u = unit(rng);
      while (u <= 0.0) u = unit(rng);
      x(static_cast<Eigen::Index>(k)) = box.lo[k] + (box.hi[k] - box.lo[k]) * u;
    }
    plan.interior.push_back(std::move(x));
  }
  if (d == 1) {
    for (double end : {box.lo[0], box.hi[0]}) {
      DenseVector x(1);
      x(0) = end;
      plan.boundary.push_back({x, classify(problem, x, box_normal(box, x))});
    }
    return;
  }
  // Faces weighted by their (d-1)-volume.
  std::vector<double> face_weight;
  for (std::size_t k = 0; k < d; ++k) {
    double area = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (j != k) area *= box.hi[j] - box.lo[j];
    }
    face_weight.push_back(area);
    face_weight.push_back(area);
  }
  std::discrete_distribution<std::size_t> pick_face(face_weight.begin(), face_weight.end());
  for (std::size_t i = 0; i < n_boundary; ++i) {
    const std::size_t face = pick_face(rng);
    const std::size_t axis = face / 2;
    DenseVector x(static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k) {
      x(static_cast<Eigen::Index>(k)) = box.lo[k] + (box.hi[k] - box.lo[k]) * unit(rng);
    }
    x(static_cast<Eigen::Index>(axis)) = face % 2 == 0 ? box.lo[axis] : box.hi[axis];
    plan.boundary.push_back({x, classify(problem, x, box_normal(box, x))});
  }
}

inline void random_ball_plan(const ProblemSpec& problem, const BallDomain& ball, const RandomBall& spec,
                             std::mt19937_64& rng, SamplePlan& plan) {
  const std::size_t d = ball.dim;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto direction = [&] {
    DenseVector v(static_cast<Eigen::Index>(d));
    double len = 0.0;
    do {
      for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = gauss(rng);
      len = v.norm();
    } while (len == 0.0);
    return DenseVector(v / len);
  };
  const std::size_t n_boundary = boundary_share(spec.count, spec.boundary_fraction);
  const std::size_t n_interior = spec.count > n_boundary ? spec.count - n_boundary : 0;
  for (std::size_t i = 0; i < n_interior; ++i) {
    double u = unit(rng);
    while (u <= 0.0 || u >= 1.0) u = unit(rng);
    const double r = std::pow(u, 1.0 / static_cast<double>(d));
    plan.interior.push_back(direction() * r);
  }
  for (std::size_t i = 0; i < n_boundary; ++i) {
    DenseVector x = direction();
    plan.boundary.push_back({x, classify(problem, x, x)});
  }
}

}  // namespace detail

/// Builds interior and boundary samples for `problem`. Throws Underdetermined
/// when the resulting system would have no more rows than `unknowns`.
inline SamplePlan build_plan(const ProblemSpec& problem, const Provenance& provenance, std::uint64_t seed,
                             std::size_t unknowns) {
  SamplePlan plan;
  plan.seed = seed;
  plan.provenance = provenance;
  std::mt19937_64 rng(seed);
  std::visit(
      [&](const auto& spec) {
        using P = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<P, UniformGrid>) {
          const auto* box = std::get_if<BoxDomain>(&problem.domain);
          if (!box) throw ConfigError("uniform grid sampling requires a box domain");
          if (!(spec.step > 0.0)) throw ConfigError("grid step must be positive");
          detail::grid_plan(problem, *box, spec.step, plan);
        } else if constexpr (std::is_same_v<P, RandomUniform>) {
          const auto* box = std::get_if<BoxDomain>(&problem.domain);
          if (!box) throw ConfigError("random uniform sampling requires a box domain");
          detail::random_box_plan(problem, *box, spec, rng, plan);
        } else {
          const auto* ball = std::get_if<BallDomain>(&problem.domain);
          if (!ball) throw ConfigError("random ball sampling requires a ball domain");
          detail::random_ball_plan(problem, *ball, spec, rng, plan);
        }
      },
      provenance);
  const std::size_t rows = plan.points() * problem.components;
  if (rows <= unknowns) {
    throw Underdetermined("sample plan gives " + std::to_string(rows) + " equations for " +
                          std::to_string(unknowns) + " unknowns; add sample points");
  }
  return plan;
}

inline std::string_view kind_name(const BoundaryKind& k) {
  return k.type == BoundaryType::Dirichlet ? "dirichlet" : "neumann";
}

/// CSV dump: coordinates then kind in {interior, dirichlet, neumann}.
inline void write_plan_csv(std::ostream& os, const SamplePlan& plan) {
  const std::size_t d =
      !plan.interior.empty() ? plan.interior.front().size() : plan.boundary.front().x.size();
  for (std::size_t k = 0; k < d; ++k) os << "x" << k << ",";
  os << "kind\n";
  os.precision(17);
  auto coords = [&](const DenseVector& x) {
    for (Eigen::Index k = 0; k < x.size(); ++k) os << x(k) << ",";
  };
  for (const auto& x : plan.interior) {
    coords(x);
    os << "interior\n";
  }
  for (const auto& b : plan.boundary) {
    coords(b.x);
    os << kind_name(b.kind) << "\n";
  }
}

/// F: R^|theta| -> R^rows for a problem, a network shape and a sample plan.
class ResidualSystem {
 public:
  ResidualSystem(const ProblemSpec& problem, NetworkShape shape, SamplePlan plan)
      : problem_(problem), params_(problem.params), shape_(std::move(shape)), plan_(std::move(plan)) {
    shape_.validate();
    if (shape_.branches != problem_.components || shape_.layer_widths.back() != 1) {
      throw ShapeMismatch("network needs one single-output branch per unknown component");
    }
    if (shape_.input_dim() != problem_.spatial_dim) {
      throw ShapeMismatch("network input dimension does not match the problem");
    }
    if (rows() <= unknowns()) {
      throw Underdetermined("system has " + std::to_string(rows()) + " rows for " +
                            std::to_string(unknowns()) + " unknowns");
    }
  }

  std::size_t rows() const { return plan_.points() * problem_.components; }
  std::size_t unknowns() const { return shape_.size(); }
  std::size_t interior_rows() const { return plan_.interior.size() * problem_.components; }

  const ProblemSpec& problem() const { return problem_; }
  const NetworkShape& shape() const { return shape_; }
  const SamplePlan& plan() const { return plan_; }
  const Parameters& params() const { return params_; }
  void set_parameter(const std::string& name, double value) {
    params_.get(name);
    params_.set(name, value);
  }

  NetworkParams network(const DenseVector& theta) const { return NetworkParams(shape_, theta); }

  /// Point and equation behind global row `row`.
  std::pair<const DenseVector*, RowSpec> row_spec(std::size_t row) const {
    if (row >= rows()) {
      throw IndexOutOfRange("row " + std::to_string(row) + " outside [0, " + std::to_string(rows()) + ")");
    }
    const std::size_t n_int = plan_.interior.size();
    RowSpec spec;
    if (row < interior_rows()) {
      spec.kind = RowKind::Interior;
      spec.component = row / n_int;
      return {&plan_.interior[row % n_int], spec};
    }
    const std::size_t r = row - interior_rows();
    const std::size_t n_b = plan_.boundary.size();
    const auto& b = plan_.boundary[r % n_b];
    spec.component = r / n_b;
    if (b.kind.type == BoundaryType::Dirichlet) {
      spec.kind = RowKind::DirichletBoundary;
    } else {
      spec.kind = RowKind::NeumannBoundary;
      spec.normal = b.kind.normal;
    }
    return {&b.x, spec};
  }

  DenseVector eval_rows(const DenseVector& theta, std::span<const std::size_t> rows) const {
    const NetworkParams net = network(theta);
    DenseVector out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto [x, spec] = row_spec(rows[i]);
      out(static_cast<Eigen::Index>(i)) = residual_value(net, detail::as_span(*x), spec, problem_, params_);
    }
    return out;
  }

  /// All rows in global order.
  DenseVector eval_all(const DenseVector& theta) const {
    const NetworkParams net = network(theta);
    DenseVector out(static_cast<Eigen::Index>(rows()));
    // Interior rows share the per-point field jets across equations.
    const std::size_t n_int = plan_.interior.size();
    const std::size_t comps = problem_.components;
    for (std::size_t p = 0; p < n_int; ++p) {
      const auto x = detail::as_span(plan_.interior[p]);
      std::vector<FieldJet> jets;
      for (std::size_t c = 0; c < comps; ++c) jets.push_back(field_jet(net, c, x));
      const FieldInputs in = detail::seeded_inputs(jets, x.size(), false);
      for (std::size_t c = 0; c < comps; ++c) {
        out(static_cast<Eigen::Index>(c * n_int + p)) = problem_.interior(in, x, c, params_).value;
      }
    }
    for (std::size_t r = interior_rows(); r < rows(); ++r) {
      const auto [x, spec] = row_spec(r);
      out(static_cast<Eigen::Index>(r)) = residual_value(net, detail::as_span(*x), spec, problem_, params_);
    }
    return out;
  }

  DenseMatrix eval_jacobian_rows(const DenseVector& theta, std::span<const std::size_t> rows) const {
    const NetworkParams net = network(theta);
    DenseMatrix jac(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(unknowns()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto [x, spec] = row_spec(rows[i]);
      jac.row(static_cast<Eigen::Index>(i)) =
          residual_row_gradient(net, detail::as_span(*x), spec, problem_, params_).partials.transpose();
    }
    return jac;
  }

  /// Values and Jacobian rows in one sweep.
  std::pair<DenseVector, DenseMatrix> eval_rows_with_jacobian(const DenseVector& theta,
                                                              std::span<const std::size_t> rows) const {
    const NetworkParams net = network(theta);
    DenseVector val(static_cast<Eigen::Index>(rows.size()));
    DenseMatrix jac(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(unknowns()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto [x, spec] = row_spec(rows[i]);
      const auto g = residual_row_gradient(net, detail::as_span(*x), spec, problem_, params_);
      val(static_cast<Eigen::Index>(i)) = g.value;
      jac.row(static_cast<Eigen::Index>(i)) = g.partials.transpose();
    }
    return {val, jac};
  }

 private:
  ProblemSpec problem_;
  Parameters params_;
  NetworkShape shape_;
  SamplePlan plan_;
};

}  // namespace rnewton
