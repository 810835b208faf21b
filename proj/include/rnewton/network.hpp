#pragma once

// Fully connected network U(x; theta) = W_n s(... s(W_1 x + b_1) ...) + b_n.
//
// theta layout, per branch: for every layer, W (row-major) followed by b.
// Systems of PDEs use one independent single-output branch per unknown
// component; the branch parameter blocks are concatenated.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rnewton/dual.hpp"
#include "rnewton/errors.hpp"
#include "rnewton/linalg.hpp"

namespace rnewton {

enum class Activation { Sin, Sigmoid, Tanh, Identity };

inline std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::Sin: return "sin";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Tanh: return "tanh";
    case Activation::Identity: return "identity";
  }
  return "?";
}

inline Activation activation_from_string(std::string_view name) {
  if (name == "sin") return Activation::Sin;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "tanh") return Activation::Tanh;
  if (name == "identity") return Activation::Identity;
  throw ConfigError("unknown activation '" + std::string(name) +
                    "' (expected sin, sigmoid, tanh or identity)");
}

/// s(z), s'(z), s''(z), s'''(z).
inline std::array<double, 4> activation_derivatives(Activation act, double z) {
  switch (act) {
    case Activation::Sin: {
      const double s = std::sin(z), c = std::cos(z);
      return {s, c, -s, -c};
    }
    case Activation::Sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      const double d1 = s * (1.0 - s);
      return {s, d1, d1 * (1.0 - 2.0 * s), d1 * (1.0 - 6.0 * s + 6.0 * s * s)};
    }
    case Activation::Tanh: {
      const double t = std::tanh(z);
      const double d1 = 1.0 - t * t;
      return {t, d1, -2.0 * t * d1, -2.0 * d1 * (1.0 - 3.0 * t * t)};
    }
    case Activation::Identity:
      return {z, 1.0, 0.0, 0.0};
  }
  return {};
}

inline double activate(Activation act, double z) { return activation_derivatives(act, z)[0]; }

template <class T>
Dual2<T> activate(Activation act, const Dual2<T>& z) {
  const auto d = activation_derivatives(act, z.value);
  return chain(z, d[0], d[1], d[2]);
}

/// Number of parameters of one branch with the given widths.
inline std::size_t param_count(std::span<const std::size_t> layer_widths) {
  if (layer_widths.size() < 2) throw ShapeMismatch("param_count: need at least two layers");
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < layer_widths.size(); ++i) {
    n += layer_widths[i + 1] * (layer_widths[i] + 1);
  }
  return n;
}

inline std::size_t param_count(std::initializer_list<std::size_t> widths) {
  return param_count(std::span<const std::size_t>(widths.begin(), widths.size()));
}

/// Shape of a (possibly multi-branch) network without parameter values.
struct NetworkShape {
  std::vector<std::size_t> layer_widths;
  std::size_t branches = 1;
  Activation activation = Activation::Sin;

  std::size_t input_dim() const { return layer_widths.front(); }
  std::size_t branch_size() const { return param_count(layer_widths); }
  std::size_t size() const { return branches * branch_size(); }
  std::size_t outputs() const { return branches * layer_widths.back(); }
  std::size_t layers() const { return layer_widths.size() - 1; }

  /// Offset of W_l of branch `branch` inside theta; b_l follows W_l.
  std::size_t weight_offset(std::size_t branch, std::size_t layer) const {
    std::size_t off = branch * branch_size();
    for (std::size_t i = 0; i < layer; ++i) off += layer_widths[i + 1] * (layer_widths[i] + 1);
    return off;
  }

  void validate() const {
    if (layer_widths.size() < 2) throw ShapeMismatch("network needs input and output widths");
    for (auto w : layer_widths) {
      if (w == 0) throw ShapeMismatch("layer widths must be positive");
    }
    if (branches == 0) throw ShapeMismatch("network needs at least one branch");
  }

  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

struct NetworkParams {
  NetworkShape shape;
  DenseVector theta;

  NetworkParams() = default;
  NetworkParams(NetworkShape s, DenseVector t) : shape(std::move(s)), theta(std::move(t)) {
    shape.validate();
    if (static_cast<std::size_t>(theta.size()) != shape.size()) {
      throw ShapeMismatch("theta has " + std::to_string(theta.size()) + " entries, shape needs " +
                          std::to_string(shape.size()));
    }
  }

  using ConstMatrixMap =
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

  ConstMatrixMap weights(std::size_t branch, std::size_t layer) const {
    const auto& w = shape.layer_widths;
    return {theta.data() + shape.weight_offset(branch, layer), static_cast<Eigen::Index>(w[layer + 1]),
            static_cast<Eigen::Index>(w[layer])};
  }
  ConstVectorMap bias(std::size_t branch, std::size_t layer) const {
    const auto& w = shape.layer_widths;
    return {theta.data() + shape.weight_offset(branch, layer) + w[layer + 1] * w[layer],
            static_cast<Eigen::Index>(w[layer + 1])};
  }
};

/// Forward pass of one branch for any scalar type closed under the
/// affine maps and the activation (double, Dual2<double>).
template <class S>
std::vector<S> forward(const NetworkParams& net, std::size_t branch, std::span<const S> x) {
  const auto& widths = net.shape.layer_widths;
  if (x.size() != widths.front()) throw ShapeMismatch("input has wrong dimension");
  std::vector<S> a(x.begin(), x.end());
  const std::size_t layers = net.shape.layers();
  for (std::size_t l = 0; l < layers; ++l) {
    const auto w = net.weights(branch, l);
    const auto b = net.bias(branch, l);
    std::vector<S> z(widths[l + 1]);
    for (std::size_t i = 0; i < z.size(); ++i) {
      S acc = S(b(static_cast<Eigen::Index>(i)));
      for (std::size_t j = 0; j < a.size(); ++j) {
        acc += a[j] * w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
      z[i] = (l + 1 < layers) ? activate(net.shape.activation, acc) : acc;
    }
    a = std::move(z);
  }
  return a;
}

/// U(x; theta), one entry per output (branches concatenated).
inline DenseVector evaluate(const NetworkParams& net, std::span<const double> x) {
  DenseVector out(static_cast<Eigen::Index>(net.shape.outputs()));
  Eigen::Index k = 0;
  for (std::size_t br = 0; br < net.shape.branches; ++br) {
    for (double v : forward<double>(net, br, x)) out(k++) = v;
  }
  return out;
}

inline DenseVector evaluate(const NetworkParams& net, const DenseVector& x) {
  return evaluate(net, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

}  // namespace rnewton
