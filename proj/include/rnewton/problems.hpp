#pragma once

// Benchmark problems: 1D/2D Poisson, the Bratu-type multi-solution BVP,
// 1D/2D viscous Burgers, Laplace on the unit n-ball and the steady
// Gray-Scott system.

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rnewton/dual.hpp"
#include "rnewton/errors.hpp"
#include "rnewton/problem.hpp"

namespace rnewton {

inline constexpr double kPi = std::numbers::pi;

/// Entropy-type profile: sin x left of the shock x0, -sin x right of it.
inline double entropy_profile(double x, double x0) { return x < x0 ? std::sin(x) : -std::sin(x); }

/// Exact radial solution of -Laplace(u) = |x| on the unit n-ball with u = 1 on the sphere.
inline double radial_solution(double r, std::size_t n) {
  const double nn = static_cast<double>(n);
  return (-r * r * r + 3.0 * nn + 4.0) / (3.0 * nn + 3.0);
}

struct ProblemOptions {
  /// Spatial dimension for laplace_ball (2..6) and gray_scott (1 or 2); 0 keeps the default.
  std::size_t dim = 0;
  /// Gray-Scott only: Dirichlet A = 0, S = 1 instead of zero flux.
  bool dirichlet_boundary = false;
};

namespace detail {

inline BoundaryClassifier all_dirichlet() {
  return [](std::span<const double>) { return BoundaryType::Dirichlet; };
}

inline BoundaryTarget zero_target() {
  return [](std::span<const double>, std::size_t, const Parameters&) { return 0.0; };
}

inline ProblemSpec poisson1d() {
  ProblemSpec p;
  p.name = "poisson1d";
  p.spatial_dim = 1;
  p.domain = BoxDomain{{0.0}, {1.0}};
  p.interior = [](const FieldInputs& f, std::span<const double> x, std::size_t, const Parameters&) {
    return f.laplacian(0) + 4.0 * kPi * kPi * std::sin(2.0 * kPi * x[0]);
  };
  p.classify_boundary = all_dirichlet();
  p.boundary_target = zero_target();
  p.reference.kind = ReferenceKind::ClosedForm;
  p.reference.fields = [](std::span<const double> x, const Parameters&) {
    const double w = 2.0 * kPi;
    return FieldValues{{std::sin(w * x[0])}, {w * std::cos(w * x[0])}, {-w * w * std::sin(w * x[0])}};
  };
  return p;
}

inline ProblemSpec bratu_family() {
  ProblemSpec p;
  p.name = "bratu_family";
  p.spatial_dim = 1;
  p.domain = BoxDomain{{0.0}, {1.0}};
  p.params = {{"lambda", 1.2}, {"p", 4.0}};
  p.continuation_parameter = "lambda";
  p.interior = [](const FieldInputs& f, std::span<const double>, std::size_t, const Parameters& prm) {
    const double lambda = prm.get("lambda");
    const int power = static_cast<int>(std::lround(prm.get("p")));
    return f.laplacian(0) + lambda * (1.0 + pow(f.u(0), power));
  };
  // u'(0) = 0 on the left, u(1) = 0 on the right.
  p.classify_boundary = [](std::span<const double> x) {
    return x[0] < 0.5 ? BoundaryType::Neumann : BoundaryType::Dirichlet;
  };
  p.boundary_target = zero_target();
  p.reference.kind = ReferenceKind::ShootingOracle;
  return p;
}

inline ProblemSpec burgers1d() {
  ProblemSpec p;
  p.name = "burgers1d";
  p.spatial_dim = 1;
  p.domain = BoxDomain{{0.0}, {kPi}};
  p.params = {{"epsilon", 1.0}};
  p.continuation_parameter = "epsilon";
  p.interior = [](const FieldInputs& f, std::span<const double> x, std::size_t, const Parameters& prm) {
    const double eps = prm.get("epsilon");
    return -eps * f.laplacian(0) + f.u(0) * f.du(0, 0) - std::sin(x[0]) * std::cos(x[0]);
  };
  p.classify_boundary = all_dirichlet();
  p.boundary_target = zero_target();
  p.reference.kind = ReferenceKind::EntropyProfile;
  p.reference.fields = [](std::span<const double> x, const Parameters&) {
    const double sign = x[0] < kPi / 2.0 ? 1.0 : -1.0;
    return FieldValues{{sign * std::sin(x[0])}, {sign * std::cos(x[0])}, {-sign * std::sin(x[0])}};
  };
  return p;
}

inline ProblemSpec poisson2d() {
  ProblemSpec p;
  p.name = "poisson2d";
  p.spatial_dim = 2;
  p.domain = BoxDomain{{0.0, 0.0}, {kPi, kPi}};
  p.interior = [](const FieldInputs& f, std::span<const double>, std::size_t, const Parameters&) {
    return f.laplacian(0) + 2.0 * f.u(0);
  };
  p.classify_boundary = all_dirichlet();
  p.boundary_target = [](std::span<const double> x, std::size_t, const Parameters&) {
    return std::sin(x[0] + x[1]);
  };
  p.reference.kind = ReferenceKind::ClosedForm;
  p.reference.fields = [](std::span<const double> x, const Parameters&) {
    const double s = std::sin(x[0] + x[1]), c = std::cos(x[0] + x[1]);
    return FieldValues{{s}, {c, c}, {-2.0 * s}};
  };
  return p;
}

inline ProblemSpec burgers2d() {
  ProblemSpec p;
  p.name = "burgers2d";
  p.spatial_dim = 2;
  const double side = kPi / std::numbers::sqrt2;
  p.domain = BoxDomain{{0.0, 0.0}, {side, side}};
  p.params = {{"epsilon", 1.0}};
  p.continuation_parameter = "epsilon";
  p.interior = [](const FieldInputs& f, std::span<const double> x, std::size_t, const Parameters& prm) {
    const double eps = prm.get("epsilon");
    const double s = (x[0] + x[1]) / std::numbers::sqrt2;
    return f.u(0) * (f.du(0, 0) + f.du(0, 1)) / std::numbers::sqrt2 - eps * f.laplacian(0) -
           std::sin(s) * std::cos(s);
  };
  p.classify_boundary = all_dirichlet();
  p.boundary_target = zero_target();
  // Travelling-coordinate entropy profile; compared along the diagonal.
  p.reference.kind = ReferenceKind::EntropyProfile;
  p.reference.fields = [](std::span<const double> x, const Parameters&) {
    const double s = (x[0] + x[1]) / std::numbers::sqrt2;
    const double sign = s < kPi / 2.0 ? 1.0 : -1.0;
    const double g = sign * std::cos(s) / std::numbers::sqrt2;
    return FieldValues{{sign * std::sin(s)}, {g, g}, {-sign * std::sin(s)}};
  };
  return p;
}

inline ProblemSpec laplace_ball(std::size_t n) {
  if (n < 2) throw ConfigError("laplace_ball needs dimension n >= 2");
  ProblemSpec p;
  p.name = "laplace_ball";
  p.spatial_dim = n;
  p.domain = BallDomain{n};
  p.interior = [](const FieldInputs& f, std::span<const double> x, std::size_t, const Parameters&) {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return f.laplacian(0) + std::sqrt(r2);
  };
  p.classify_boundary = all_dirichlet();
  p.boundary_target = [](std::span<const double>, std::size_t, const Parameters&) { return 1.0; };
  p.reference.kind = ReferenceKind::RadialClosedForm;
  p.reference.fields = [n](std::span<const double> x, const Parameters&) {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    const double r = std::sqrt(r2);
    FieldValues out{{radial_solution(r, n)}, {}, {-r}};
    for (double v : x) out.grad.push_back(-r * v / (static_cast<double>(n) + 1.0));
    return out;
  };
  return p;
}

inline ProblemSpec gray_scott(std::size_t dim, bool dirichlet) {
  if (dim != 1 && dim != 2) throw ConfigError("gray_scott supports dimension 1 or 2");
  ProblemSpec p;
  p.name = "gray_scott";
  p.spatial_dim = dim;
  p.components = 2;
  p.domain = BoxDomain{std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
  p.params = {{"D_A", 2.5e-4}, {"D_S", 5e-4}, {"rho", 0.04}, {"mu", 0.065}};
  p.interior = [](const FieldInputs& f, std::span<const double>, std::size_t eq, const Parameters& prm) {
    const Jet& a = f.u(0);
    const Jet& s = f.u(1);
    const double rho = prm.get("rho");
    const Jet sa2 = s * a * a;
    if (eq == 0) return prm.get("D_A") * f.laplacian(0) + sa2 - (prm.get("mu") + rho) * a;
    return prm.get("D_S") * f.laplacian(1) - sa2 + rho * (1.0 - s);
  };
  if (dirichlet) {
    p.classify_boundary = all_dirichlet();
    p.boundary_target = [](std::span<const double>, std::size_t c, const Parameters&) { return c == 0 ? 0.0 : 1.0; };
  } else {
    p.classify_boundary = [](std::span<const double>) { return BoundaryType::Neumann; };
    p.boundary_target = zero_target();
  }
  return p;
}

}  // namespace detail

inline const std::vector<std::string>& problem_names() {
  static const std::vector<std::string> names{"poisson1d", "bratu_family", "burgers1d",   "poisson2d",
                                              "burgers2d", "laplace_ball", "gray_scott"};
  return names;
}

/// Catalog entry by name.
inline ProblemSpec make_problem(std::string_view name, const ProblemOptions& opt = {}) {
  if (name == "poisson1d") return detail::poisson1d();
  if (name == "bratu_family") return detail::bratu_family();
  if (name == "burgers1d") return detail::burgers1d();
  if (name == "poisson2d") return detail::poisson2d();
  if (name == "burgers2d") return detail::burgers2d();
  if (name == "laplace_ball") return detail::laplace_ball(opt.dim == 0 ? 2 : opt.dim);
  if (name == "gray_scott") return detail::gray_scott(opt.dim == 0 ? 1 : opt.dim, opt.dirichlet_boundary);
  throw ConfigError("unknown problem '" + std::string(name) + "'");
}

/// All seven problems with default options.
inline std::vector<ProblemSpec> catalog() {
  std::vector<ProblemSpec> out;
  for (const auto& n : problem_names()) out.push_back(make_problem(n));
  return out;
}

}  // namespace rnewton
