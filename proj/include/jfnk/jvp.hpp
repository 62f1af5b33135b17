#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "jfnk/dual.hpp"
#include "jfnk/numerics.hpp"

namespace jfnk {

// A residual is a pure map F(x) -> out of equal length, with any frozen
// context (previous state, dt, sources, grid) captured inside the functor.
// It must be evaluable over plain scalars and over duals with identical
// control flow.
template <class F, class T>
concept ResidualFn = requires(const F& f, std::span<const T> x, std::span<T> out,
                              std::span<const Dual<T>> xd, std::span<Dual<T>> outd) {
  { f.dim() } -> std::convertible_to<std::size_t>;
  f(x, out);
  f(xd, outd);
};

template <class T>
struct JvpWorkspace {
  std::vector<Dual<T>> x_dual;
  std::vector<Dual<T>> out_dual;
};

// Forward-mode Jacobian-vector product: seeds each coordinate's tangent with
// v_i and evaluates the residual once over duals, returning the primal
// residual F(x) and the directional derivative J(x)·v in one pass.
template <class T, class F>
  requires ResidualFn<F, T>
void jvp(const F& f, std::span<const T> x, std::span<const T> v, std::span<T> primal,
         std::span<T> tangent, JvpWorkspace<T>& ws) {
  const std::size_t n = f.dim();
  JFNK_REQUIRE(x.size() == n && v.size() == n, "jvp: dimension mismatch");
  JFNK_REQUIRE(primal.size() == n && tangent.size() == n, "jvp: output dimension mismatch");
  ws.x_dual.resize(n);
  ws.out_dual.resize(n);
  for (std::size_t i = 0; i < n; ++i) ws.x_dual[i] = Dual<T>{x[i], v[i]};
  f(std::span<const Dual<T>>(ws.x_dual.data(), n), std::span<Dual<T>>(ws.out_dual.data(), n));
  for (std::size_t i = 0; i < n; ++i) {
    primal[i] = ws.out_dual[i].primal;
    tangent[i] = ws.out_dual[i].tangent;
  }
  // A finite primal with a non-finite tangent means an elementary rule was
  // differentiated at a singular point without throwing (0*inf paths).
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isfinite(primal[i]) && !std::isfinite(tangent[i]))
      throw DerivativeSingularity("non-finite tangent at finite primal", static_cast<long>(i));
  }
}

template <class T, class F>
  requires ResidualFn<F, T>
std::pair<StateVector<T>, StateVector<T>> jvp(const F& f, std::span<const T> x,
                                              std::span<const T> v) {
  StateVector<T> primal(f.dim()), tangent(f.dim());
  JvpWorkspace<T> ws;
  jvp(f, x, v, mspan(primal), mspan(tangent), ws);
  return {std::move(primal), std::move(tangent)};
}

}  // namespace jfnk
