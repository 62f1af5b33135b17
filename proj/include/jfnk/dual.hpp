#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "jfnk/numerics.hpp"

// Forward-mode AD scalar: a (primal, tangent) pair obeying the chain rule.
// Arithmetic on the primal half performs exactly the operations a plain
// scalar evaluation would, in the same order, so the primal output of a
// dual evaluation is bit-identical to a plain evaluation of the same code.

namespace jfnk {

// Raised when an elementary derivative rule is evaluated at a point where
// the derivative does not exist (sqrt at zero with a live tangent).
class DerivativeSingularity : public std::runtime_error {
 public:
  explicit DerivativeSingularity(const std::string& what, long index = -1)
      : std::runtime_error(what), index_(index) {}
  // Output coordinate the singular tangent landed in, -1 if unknown.
  long index() const { return index_; }

 private:
  long index_;
};

template <class T>
struct Dual {
  T primal{};
  T tangent{};

  constexpr Dual() = default;
  constexpr Dual(T p) : primal(p), tangent(T(0)) {}
  constexpr Dual(T p, T t) : primal(p), tangent(t) {}

  constexpr Dual& operator+=(const Dual& o) {
    primal += o.primal;
    tangent += o.tangent;
    return *this;
  }
  constexpr Dual& operator-=(const Dual& o) {
    primal -= o.primal;
    tangent -= o.tangent;
    return *this;
  }
  constexpr Dual& operator*=(const Dual& o) { return *this = *this * o; }

  friend constexpr Dual operator-(const Dual& a) { return {-a.primal, -a.tangent}; }

  friend constexpr Dual operator+(const Dual& a, const Dual& b) {
    return {a.primal + b.primal, a.tangent + b.tangent};
  }
  friend constexpr Dual operator-(const Dual& a, const Dual& b) {
    return {a.primal - b.primal, a.tangent - b.tangent};
  }
  friend constexpr Dual operator*(const Dual& a, const Dual& b) {
    return {a.primal * b.primal, a.tangent * b.primal + a.primal * b.tangent};
  }
  friend constexpr Dual operator/(const Dual& a, const Dual& b) {
    const T q = a.primal / b.primal;
    return {q, (a.tangent - q * b.tangent) / b.primal};
  }

  // Mixed arithmetic with the frozen (non-differentiated) context.
  friend constexpr Dual operator+(const Dual& a, T b) { return {a.primal + b, a.tangent}; }
  friend constexpr Dual operator+(T a, const Dual& b) { return {a + b.primal, b.tangent}; }
  friend constexpr Dual operator-(const Dual& a, T b) { return {a.primal - b, a.tangent}; }
  friend constexpr Dual operator-(T a, const Dual& b) { return {a - b.primal, -b.tangent}; }
  friend constexpr Dual operator*(const Dual& a, T b) { return {a.primal * b, a.tangent * b}; }
  friend constexpr Dual operator*(T a, const Dual& b) { return {a * b.primal, a * b.tangent}; }
  friend constexpr Dual operator/(const Dual& a, T b) { return {a.primal / b, a.tangent / b}; }
  friend constexpr Dual operator/(T a, const Dual& b) {
    const T q = a / b.primal;
    return {q, -q * b.tangent / b.primal};
  }

  // Comparisons act on primals only; residuals must not branch on tangents.
  friend constexpr bool operator<(const Dual& a, const Dual& b) { return a.primal < b.primal; }
  friend constexpr bool operator>(const Dual& a, const Dual& b) { return a.primal > b.primal; }
  friend constexpr bool operator<(const Dual& a, T b) { return a.primal < b; }
  friend constexpr bool operator>(const Dual& a, T b) { return a.primal > b; }
};

template <class T>
Dual<T> sqrt(const Dual<T>& a) {
  if (a.primal <= T(0)) {
    if (a.tangent != T(0))
      throw DerivativeSingularity("sqrt derivative singular at nonpositive primal");
    return {std::sqrt(a.primal), T(0)};
  }
  const T s = std::sqrt(a.primal);
  return {s, a.tangent / (T(2) * s)};
}

template <class T>
Dual<T> sin(const Dual<T>& a) {
  return {std::sin(a.primal), a.tangent * std::cos(a.primal)};
}

template <class T>
Dual<T> cos(const Dual<T>& a) {
  return {std::cos(a.primal), -a.tangent * std::sin(a.primal)};
}

template <class T>
Dual<T> exp(const Dual<T>& a) {
  const T e = std::exp(a.primal);
  return {e, a.tangent * e};
}

template <class T>
Dual<T> tanh(const Dual<T>& a) {
  const T t = std::tanh(a.primal);
  return {t, a.tangent * (T(1) - t * t)};
}

// max against a frozen floor; the branch is on the primal value.
template <class T>
Dual<T> floor_guard(const Dual<T>& a, T floor) {
  return a.primal > floor ? a : Dual<T>{floor, T(0)};
}

template <class T>
T floor_guard(T a, T floor) {
  return a > floor ? a : floor;
}

// Smoothed |x| = sqrt(x^2 + delta^2); used only when building initial
// conditions, never inside a differentiated residual.
template <class T>
T abs_smoothed(T x, T delta = eps_mach<T>) {
  return std::sqrt(x * x + delta * delta);
}

template <class T>
Dual<T> abs_smoothed(const Dual<T>& x, T delta = eps_mach<T>) {
  return sqrt(x * x + Dual<T>{delta * delta, T(0)});
}

template <class T>
struct scalar_traits {
  using real_type = T;
};

template <class T>
struct scalar_traits<Dual<T>> {
  using real_type = T;
};

}  // namespace jfnk
