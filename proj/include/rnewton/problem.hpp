#pragma once

// Problem description consumed by the residual assembler: PDE operator,
// domain geometry, boundary data and named parameters.

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "rnewton/dual.hpp"
#include "rnewton/errors.hpp"
#include "rnewton/linalg.hpp"

namespace rnewton {

/// Axis-aligned box [lo_0, hi_0] x ... x [lo_d, hi_d].
struct BoxDomain {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Closed unit ball in R^dim centred at the origin.
struct BallDomain {
  std::size_t dim = 2;
};

using Domain = std::variant<BoxDomain, BallDomain>;

inline std::size_t domain_dim(const Domain& d) {
  return std::visit(
      [](const auto& g) -> std::size_t {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, BoxDomain>) {
          return g.lo.size();
        } else {
          return g.dim;
        }
      },
      d);
}

class Parameters {
 public:
  Parameters() = default;
  Parameters(std::initializer_list<std::pair<const std::string, double>> init) : values_(init) {}

  double get(const std::string& name) const {
    auto it = values_.find(name);
    if (it == values_.end()) throw ConfigError("problem has no parameter '" + name + "'");
    return it->second;
  }
  bool has(const std::string& name) const { return values_.count(name) > 0; }
  void set(const std::string& name, double v) { values_[name] = v; }
  const std::map<std::string, double>& all() const { return values_; }

 private:
  std::map<std::string, double> values_;
};

/// Local field values of all unknown components at one point, as Jets so
/// an operator evaluation also yields its partial derivatives.
struct FieldInputs {
  std::size_t dim = 1;
  std::vector<Jet> value;  // one per component
  std::vector<Jet> grad;   // component-major, dim entries per component
  std::vector<Jet> lap;    // one per component

  const Jet& u(std::size_t c) const { return value[c]; }
  const Jet& du(std::size_t c, std::size_t k) const { return grad[c * dim + k]; }
  const Jet& laplacian(std::size_t c) const { return lap[c]; }

  /// Number of Jet slots used when every input is an independent variable.
  static std::size_t slots(std::size_t components, std::size_t dim) {
    return components * (dim + 2);
  }
};

/// Plain (non-differentiated) field values, used for references.
struct FieldValues {
  std::vector<double> value;
  std::vector<double> grad;  // component-major
  std::vector<double> lap;
};

inline FieldInputs constant_inputs(const FieldValues& f, std::size_t dim) {
  FieldInputs in;
  in.dim = dim;
  for (double v : f.value) in.value.emplace_back(v);
  for (double v : f.grad) in.grad.emplace_back(v);
  for (double v : f.lap) in.lap.emplace_back(v);
  return in;
}

/// Interior residual of equation `equation` at point x.
using InteriorOperator = std::function<Jet(const FieldInputs& fields, std::span<const double> x,
                                           std::size_t equation, const Parameters& params)>;

enum class BoundaryType { Dirichlet, Neumann };

/// Boundary classification of a sampled boundary point; Neumann rows use
/// the unit outward normal.
struct BoundaryKind {
  BoundaryType type = BoundaryType::Dirichlet;
  DenseVector normal;
};

using BoundaryClassifier = std::function<BoundaryType(std::span<const double> x)>;

/// Dirichlet value or prescribed normal flux for component c at x.
using BoundaryTarget =
    std::function<double(std::span<const double> x, std::size_t component, const Parameters& params)>;

enum class ReferenceKind { None, ClosedForm, ShootingOracle, EntropyProfile, RadialClosedForm };

/// Closed-form or oracle-backed exact solution. `fields` returns value,
/// gradient and Laplacian where a closed form exists.
struct ReferenceSolution {
  ReferenceKind kind = ReferenceKind::None;
  std::function<FieldValues(std::span<const double> x, const Parameters& params)> fields;
};

struct ProblemSpec {
  std::string name;
  std::size_t spatial_dim = 1;
  std::size_t components = 1;
  Domain domain;
  Parameters params;
  /// Name of the parameter tracked by continuation, empty when none.
  std::string continuation_parameter;
  InteriorOperator interior;
  BoundaryClassifier classify_boundary;
  BoundaryTarget boundary_target;
  ReferenceSolution reference;
};

}  // namespace rnewton
