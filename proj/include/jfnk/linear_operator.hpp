#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "jfnk/jvp.hpp"
#include "jfnk/numerics.hpp"

// The matrix-free linear operator J(x^k)·v presented to the Krylov solvers.
// The two strategies differ only in how apply() evaluates the product:
// a one-sided FD residual difference or a forward-mode dual evaluation.

namespace jfnk {

enum class JvpStrategy { FD, AD };

inline const char* to_string(JvpStrategy s) { return s == JvpStrategy::FD ? "fd" : "ad"; }

template <class T>
class LinearOperator {
 public:
  using ApplyFn = std::function<void(std::span<const T>, std::span<T>)>;

  LinearOperator(std::size_t dim, ApplyFn fn) : dim_(dim), fn_(std::move(fn)) {
    JFNK_REQUIRE(dim_ > 0, "LinearOperator: dim must be positive");
  }

  std::size_t dim() const { return dim_; }
  long call_count() const { return calls_; }

  void apply(std::span<const T> v, std::span<T> out) const {
    JFNK_REQUIRE(v.size() == dim_ && out.size() == dim_, "LinearOperator: dimension mismatch");
    ++calls_;
    fn_(v, out);
  }

  StateVector<T> apply(std::span<const T> v) const {
    StateVector<T> out(dim_);
    apply(v, mspan(out));
    return out;
  }

 private:
  std::size_t dim_;
  ApplyFn fn_;
  mutable long calls_ = 0;
};

// FD perturbation rule: eps = sqrt(eps_mach)*max(1,||x||), clamped to
// [eps_mach^(3/4), 1] against overflow/underflow of the perturbed state.
template <class T>
T fd_epsilon_from_norm(T x_norm) {
  const T eps = std::sqrt(eps_mach<T>) * std::max(T(1), x_norm);
  const T lo = std::pow(eps_mach<T>, T(0.75));
  return std::clamp(eps, lo, T(1));
}

template <class T>
T fd_epsilon(std::span<const T> x) {
  return fd_epsilon_from_norm(norm2(x));
}

// One-sided forward difference (F(x + eps v) - F(x)) / eps with the cached
// base residual Fx. A zero direction returns zero without evaluating F.
template <class T, class F>
  requires ResidualFn<F, T>
void fd_jvp(const F& f, std::span<const T> x, std::span<const T> fx, std::span<const T> v,
            std::span<T> out, StateVector<T>& x_pert, StateVector<T>& f_pert,
            T x_norm_factor) {
  const std::size_t n = f.dim();
  JFNK_REQUIRE(x.size() == n && fx.size() == n && v.size() == n && out.size() == n,
               "fd_jvp: dimension mismatch");
  if (norm2(v) == T(0)) {
    std::fill(out.begin(), out.end(), T(0));
    return;
  }
  const T eps = fd_epsilon_from_norm(x_norm_factor);
  x_pert.resize(n);
  f_pert.resize(n);
  for (std::size_t i = 0; i < n; ++i) x_pert[i] = x[i] + eps * v[i];
  f(cspan(x_pert), mspan(f_pert));
  const T inv_eps = T(1) / eps;
  for (std::size_t i = 0; i < n; ++i) out[i] = (f_pert[i] - fx[i]) * inv_eps;
}

template <class T, class F>
  requires ResidualFn<F, T>
StateVector<T> fd_jvp(const F& f, std::span<const T> x, std::span<const T> fx,
                      std::span<const T> v) {
  StateVector<T> out(f.dim()), xp, fp;
  fd_jvp(f, x, fx, v, mspan(out), xp, fp, norm2(x));
  return out;
}

// Builds the operator for one Newton iteration: x and Fx are frozen copies,
// shared by every apply within that iteration. Workspace buffers are reused
// across applies.
template <class T, class F>
  requires ResidualFn<F, T>
LinearOperator<T> make_operator(const F& f, std::span<const T> x, std::span<const T> fx,
                                JvpStrategy strategy) {
  const std::size_t n = f.dim();
  JFNK_REQUIRE(x.size() == n && fx.size() == n, "make_operator: dimension mismatch");

  struct Frozen {
    const F* f;
    StateVector<T> x, fx;
    T x_norm;
    JvpWorkspace<T> ws;
    StateVector<T> x_pert, f_pert, primal;
  };
  auto fr = std::make_shared<Frozen>();
  fr->f = &f;
  fr->x.assign(x.begin(), x.end());
  fr->fx.assign(fx.begin(), fx.end());
  fr->x_norm = norm2(x);

  if (strategy == JvpStrategy::FD) {
    return LinearOperator<T>(n, [fr](std::span<const T> v, std::span<T> out) {
      fd_jvp(*fr->f, cspan(fr->x), cspan(fr->fx), v, out, fr->x_pert, fr->f_pert, fr->x_norm);
    });
  }
  return LinearOperator<T>(n, [fr, n](std::span<const T> v, std::span<T> out) {
    fr->primal.resize(n);
    jvp(*fr->f, cspan(fr->x), v, mspan(fr->primal), out, fr->ws);
  });
}

}  // namespace jfnk
