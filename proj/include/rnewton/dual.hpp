#pragma once

// Forward-mode number types.
//
// Dual2<T> carries a value together with the first and second derivative
// along one fixed direction, so pushing x + t*e through a function yields
// f, (d/dt) f and (d^2/dt^2) f at t = 0.
//
// Jet is a first-order dual with a short dense gradient. It is used to get
// the partial derivatives of a PDE operator with respect to its local
// inputs (U, grad U, Laplacian U) in a single evaluation.

#include <cassert>
#include <cmath>
#include <cstddef>

#include <Eigen/Core>

namespace rnewton {

template <class T>
struct Dual2 {
  T value{};
  T first{};
  T second{};

  constexpr Dual2() = default;
  constexpr Dual2(T v) : value(v) {}  // NOLINT: implicit promotion of constants
  constexpr Dual2(T v, T d1, T d2) : value(v), first(d1), second(d2) {}

  Dual2& operator+=(const Dual2& o) {
    value += o.value;
    first += o.first;
    second += o.second;
    return *this;
  }
  Dual2& operator-=(const Dual2& o) {
    value -= o.value;
    first -= o.first;
    second -= o.second;
    return *this;
  }
  Dual2& operator*=(const Dual2& o) { return *this = *this * o; }
};

template <class T>
Dual2<T> operator-(const Dual2<T>& a) {
  return {-a.value, -a.first, -a.second};
}
template <class T>
Dual2<T> operator+(Dual2<T> a, const Dual2<T>& b) {
  return a += b;
}
template <class T>
Dual2<T> operator-(Dual2<T> a, const Dual2<T>& b) {
  return a -= b;
}
template <class T>
Dual2<T> operator*(const Dual2<T>& a, const Dual2<T>& b) {
  return {a.value * b.value, a.first * b.value + a.value * b.first,
          a.second * b.value + T(2) * a.first * b.first + a.value * b.second};
}
template <class T>
Dual2<T> operator/(const Dual2<T>& a, const Dual2<T>& b) {
  const T inv = T(1) / b.value;
  const T q = a.value * inv;
  const T q1 = (a.first - q * b.first) * inv;
  const T q2 = (a.second - T(2) * q1 * b.first - q * b.second) * inv;
  return {q, q1, q2};
}
template <class T>
Dual2<T> operator+(const Dual2<T>& a, double c) {
  return {a.value + c, a.first, a.second};
}
template <class T>
Dual2<T> operator+(double c, const Dual2<T>& a) {
  return a + c;
}
template <class T>
Dual2<T> operator-(const Dual2<T>& a, double c) {
  return {a.value - c, a.first, a.second};
}
template <class T>
Dual2<T> operator-(double c, const Dual2<T>& a) {
  return {c - a.value, -a.first, -a.second};
}
template <class T>
Dual2<T> operator*(const Dual2<T>& a, double c) {
  return {a.value * c, a.first * c, a.second * c};
}
template <class T>
Dual2<T> operator*(double c, const Dual2<T>& a) {
  return a * c;
}

/// Applies a scalar function given its value and first two derivatives at
/// a.value (chain rule for second directional derivatives).
template <class T>
Dual2<T> chain(const Dual2<T>& a, T g0, T g1, T g2) {
  return {g0, g1 * a.first, g2 * a.first * a.first + g1 * a.second};
}

template <class T>
Dual2<T> sin(const Dual2<T>& a) {
  using std::cos;
  using std::sin;
  const T s = sin(a.value);
  return chain(a, s, cos(a.value), -s);
}
template <class T>
Dual2<T> cos(const Dual2<T>& a) {
  using std::cos;
  using std::sin;
  const T c = cos(a.value);
  return chain(a, c, -sin(a.value), -c);
}
template <class T>
Dual2<T> tanh(const Dual2<T>& a) {
  using std::tanh;
  const T t = tanh(a.value);
  const T d1 = T(1) - t * t;
  return chain(a, t, d1, T(-2) * t * d1);
}
template <class T>
Dual2<T> exp(const Dual2<T>& a) {
  using std::exp;
  const T e = exp(a.value);
  return chain(a, e, e, e);
}

/// First-order dual number with a gradient of at most kMaxSlots entries.
struct Jet {
  static constexpr int kMaxSlots = 16;
  using Gradient = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxSlots, 1>;

  double value = 0.0;
  Gradient grad;

  Jet() = default;
  Jet(double v) : value(v) {}  // NOLINT: constants promote implicitly
  Jet(double v, Gradient g) : value(v), grad(std::move(g)) {}

  /// Independent variable occupying gradient slot `slot` of `slots`.
  static Jet variable(double v, int slot, int slots) {
    assert(slots <= kMaxSlots);
    Gradient g = Gradient::Zero(slots);
    g(slot) = 1.0;
    return {v, g};
  }
};

namespace detail {
// Constants carry an empty gradient; combine gradients of mixed sizes.
inline Jet::Gradient axpby(double a, const Jet::Gradient& x, double b, const Jet::Gradient& y) {
  if (x.size() == 0) return b * y;
  if (y.size() == 0) return a * x;
  return a * x + b * y;
}
}  // namespace detail

inline Jet operator-(const Jet& a) { return {-a.value, -a.grad}; }
inline Jet operator+(const Jet& a, const Jet& b) {
  return {a.value + b.value, detail::axpby(1.0, a.grad, 1.0, b.grad)};
}
inline Jet operator-(const Jet& a, const Jet& b) {
  return {a.value - b.value, detail::axpby(1.0, a.grad, -1.0, b.grad)};
}
inline Jet operator*(const Jet& a, const Jet& b) {
  return {a.value * b.value, detail::axpby(b.value, a.grad, a.value, b.grad)};
}
inline Jet operator/(const Jet& a, const Jet& b) {
  const double q = a.value / b.value;
  return {q, detail::axpby(1.0 / b.value, a.grad, -q / b.value, b.grad)};
}
inline Jet operator+(const Jet& a, double c) { return {a.value + c, a.grad}; }
inline Jet operator+(double c, const Jet& a) { return {a.value + c, a.grad}; }
inline Jet operator-(const Jet& a, double c) { return {a.value - c, a.grad}; }
inline Jet operator-(double c, const Jet& a) { return {c - a.value, -a.grad}; }
inline Jet operator*(const Jet& a, double c) { return {a.value * c, a.grad * c}; }
inline Jet operator*(double c, const Jet& a) { return {a.value * c, a.grad * c}; }
inline Jet operator/(const Jet& a, double c) { return {a.value / c, a.grad / c}; }

inline Jet sin(const Jet& a) { return {std::sin(a.value), std::cos(a.value) * a.grad}; }
inline Jet cos(const Jet& a) { return {std::cos(a.value), -std::sin(a.value) * a.grad}; }
inline Jet exp(const Jet& a) {
  const double e = std::exp(a.value);
  return {e, e * a.grad};
}
inline Jet pow(const Jet& a, int n) {
  if (n == 0) return Jet(1.0);
  const double p = std::pow(a.value, n - 1);
  return {p * a.value, (n * p) * a.grad};
}

}  // namespace rnewton
