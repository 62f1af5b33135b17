#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "jfnk/krylov.hpp"
#include "jfnk/linear_operator.hpp"
#include "jfnk/numerics.hpp"

// The JFNK driver: Newton loop with a matrix-free Krylov inner solve and
// backtracking line search. The residual functor carries the frozen context
// (previous state / sources); x_star is the reference state used only to
// normalize the stopping rule ||F(x^k)|| / ||F(x*)||.

namespace jfnk {

template <class T>
struct NewtonConfig {
  T tol_newton = precision_of<T>() == Precision::FP32 ? T(1e-4) : T(1e-6);
  int max_newton = 15;  // 15 for the time-dependent IBVPs, 50 for the Maxwell BVP
  bool line_search = true;
  T c_decrease = T(1e-4);
  int max_backtracks = 8;
};

enum class NewtonStatus { Converged, MaxIterations, NonFinite, Breakdown };

template <class T>
struct NewtonReport {
  long iterations = 0;
  bool converged = false;
  NewtonStatus status = NewtonStatus::MaxIterations;
  std::vector<T> relres_history;
  long krylov_iters_total = 0;
  std::vector<KrylovReport<T>> krylov_reports;
  long backtrack_count = 0;
  T final_relres = T(0);
};

template <class T>
struct LineSearchResult {
  T alpha = T(1);
  StateVector<T> x_new;
  StateVector<T> f_new;
  long backtracks = 0;
  bool all_non_finite = false;
};

// Backtracking on sufficient residual decrease: alpha starts at 1 and is
// halved while ||F(x + alpha d)|| > (1 - c*alpha)*Fnorm, up to max_backtracks
// halvings. The last trial is returned whether or not it was accepted.
template <class T, class F>
  requires ResidualFn<F, T>
LineSearchResult<T> line_search(const F& f, std::span<const T> x, std::span<const T> delta,
                                T f_norm, const NewtonConfig<T>& cfg) {
  JFNK_REQUIRE(f_norm > T(0), "line_search: zero base residual");
  const std::size_t n = f.dim();
  LineSearchResult<T> res;
  res.x_new.resize(n);
  res.f_new.resize(n);
  T alpha = T(1);
  bool any_finite = false;
  for (long t = 0;; ++t) {
    for (std::size_t i = 0; i < n; ++i) res.x_new[i] = x[i] + alpha * delta[i];
    f(cspan(res.x_new), mspan(res.f_new));
    const T fn = norm2(cspan(res.f_new));
    res.alpha = alpha;
    res.backtracks = t;
    if (std::isfinite(fn)) {
      any_finite = true;
      if (fn <= (T(1) - cfg.c_decrease * alpha) * f_norm) return res;
    }
    if (t == cfg.max_backtracks) break;
    alpha *= T(0.5);
  }
  res.all_non_finite = !any_finite;
  return res;
}

template <class T>
using PreconditionerBuilder = std::function<Preconditioner<T>(std::span<const T>)>;

template <class T, class F>
  requires ResidualFn<F, T>
std::pair<StateVector<T>, NewtonReport<T>> newton_solve(
    const F& f, std::span<const T> x0, std::span<const T> x_star, JvpStrategy strategy,
    const KrylovConfig<T>& kcfg, const NewtonConfig<T>& ncfg,
    const PreconditionerBuilder<T>& m_builder = nullptr) {
  const std::size_t n = f.dim();
  JFNK_REQUIRE(x0.size() == n && x_star.size() == n, "newton_solve: dimension mismatch");

  NewtonReport<T> report;
  StateVector<T> x(x0.begin(), x0.end());
  StateVector<T> fx(n), f_star(n), rhs(n);
  const StateVector<T> zeros(n, T(0));

  f(x_star, mspan(f_star));
  const T den = std::max(norm2(cspan(f_star)), eps_mach<T>);
  JFNK_REQUIRE(std::isfinite(den), "newton_solve: non-finite reference residual");

  f(cspan(x), mspan(fx));
  T f_norm = norm2(cspan(fx));
  T relres = f_norm / den;
  report.relres_history.push_back(relres);
  report.final_relres = relres;
  if (!std::isfinite(relres)) {
    report.status = NewtonStatus::NonFinite;
    return {std::move(x), std::move(report)};
  }

  for (int k = 0; k < ncfg.max_newton; ++k) {
    if (relres < ncfg.tol_newton) break;

    auto A = make_operator<T>(f, cspan(x), cspan(fx), strategy);
    const Preconditioner<T> M = m_builder ? m_builder(cspan(x)) : Preconditioner<T>::identity();
    for (std::size_t i = 0; i < n; ++i) rhs[i] = -fx[i];
    auto [delta, krep] = krylov_solve(A, cspan(rhs), cspan(zeros), M, kcfg);
    report.krylov_iters_total += krep.iterations;
    report.krylov_reports.push_back(std::move(krep));

    if (!all_finite(cspan(delta))) {
      // A breakdown may still leave a usable partial correction; a
      // non-finite one cannot be recovered.
      report.status = report.krylov_reports.back().breakdown ? NewtonStatus::Breakdown
                                                             : NewtonStatus::NonFinite;
      report.iterations = k + 1;
      return {std::move(x), std::move(report)};
    }

    if (ncfg.line_search) {
      auto ls = line_search(f, cspan(x), cspan(delta), f_norm, ncfg);
      report.backtrack_count += ls.backtracks;
      x = std::move(ls.x_new);
      fx = std::move(ls.f_new);
    } else {
      axpy(T(1), cspan(delta), mspan(x));
      f(cspan(x), mspan(fx));
    }
    f_norm = norm2(cspan(fx));
    relres = f_norm / den;
    report.relres_history.push_back(relres);
    report.final_relres = relres;
    report.iterations = k + 1;
    if (!std::isfinite(relres)) {
      report.status = NewtonStatus::NonFinite;
      return {std::move(x), std::move(report)};
    }
  }

  report.converged = relres < ncfg.tol_newton;
  report.status = report.converged ? NewtonStatus::Converged : NewtonStatus::MaxIterations;
  return {std::move(x), std::move(report)};
}

}  // namespace jfnk
