#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "jfnk/linear_operator.hpp"
#include "jfnk/numerics.hpp"

// Matrix-free iterative linear solvers: restarted GMRES (modified
// Gram-Schmidt Arnoldi, Givens rotations), BiCGSTAB, and CG, all with
// optional right preconditioning so the reported residual is ||b - Ax||.
// The solvers touch A only through apply().

namespace jfnk {

enum class KrylovMethod { GMRES, BICGSTAB, CG };

inline const char* to_string(KrylovMethod m) {
  switch (m) {
    case KrylovMethod::GMRES: return "gmres";
    case KrylovMethod::BICGSTAB: return "bicgstab";
    default: return "cg";
  }
}

template <class T>
struct KrylovConfig {
  KrylovMethod method = KrylovMethod::GMRES;
  T rel_tol = precision_of<T>() == Precision::FP32 ? T(1e-6) : T(1e-8);
  // For GMRES this caps restart cycles; for BiCGSTAB/CG, iterations.
  int max_outer = 100;
  int restart_len = 20;
};

template <class T>
struct KrylovReport {
  long iterations = 0;         // operator applications (matrix-vector products)
  long method_iterations = 0;  // solver's own count: Arnoldi steps / full BiCGSTAB its / CG its
  bool converged = false;
  T final_relres = T(0);
  bool breakdown = false;
  int restarts = 0;  // GMRES only
  std::vector<T> resid_history;
};

template <class T>
class Preconditioner {
 public:
  using ApplyFn = std::function<void(std::span<const T>, std::span<T>)>;

  Preconditioner() = default;  // identity
  explicit Preconditioner(ApplyFn fn) : fn_(std::move(fn)) {}

  static Preconditioner identity() { return Preconditioner(); }
  bool is_identity() const { return !fn_; }

  void apply(std::span<const T> v, std::span<T> out) const {
    if (!fn_) {
      std::copy(v.begin(), v.end(), out.begin());
      return;
    }
    fn_(v, out);
  }

 private:
  ApplyFn fn_;
};

namespace detail {

template <class T>
T rhs_norm_floor(std::span<const T> b) {
  return std::max(norm2(b), eps_mach<T>);
}

}  // namespace detail

template <class T>
std::pair<StateVector<T>, KrylovReport<T>> gmres(const LinearOperator<T>& A,
                                                 std::span<const T> b, std::span<const T> x0,
                                                 const Preconditioner<T>& M,
                                                 const KrylovConfig<T>& cfg) {
  const std::size_t n = A.dim();
  JFNK_REQUIRE(b.size() == n && x0.size() == n, "gmres: dimension mismatch");
  JFNK_REQUIRE(cfg.restart_len > 0 && cfg.max_outer > 0, "gmres: bad config");
  const int m = cfg.restart_len;

  KrylovReport<T> report;
  const long calls0 = A.call_count();
  StateVector<T> x(x0.begin(), x0.end());
  const T bnorm = detail::rhs_norm_floor(b);
  const bool x0_zero = std::all_of(x0.begin(), x0.end(), [](T v) { return v == T(0); });

  std::vector<StateVector<T>> V(m + 1, StateVector<T>(n));
  std::vector<StateVector<T>> H(m, StateVector<T>(m + 1, T(0)));
  StateVector<T> cs(m), sn(m), g(m + 1), z(n), w(n), r(n);

  for (int cycle = 0; cycle < cfg.max_outer; ++cycle) {
    // True residual at the start of every cycle.
    if (cycle == 0 && x0_zero) {
      std::copy(b.begin(), b.end(), r.begin());
    } else {
      A.apply(cspan(x), mspan(r));
      for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    }
    const T beta = norm2(cspan(r));
    report.final_relres = beta / bnorm;
    report.resid_history.push_back(report.final_relres);
    if (!std::isfinite(beta)) {
      report.breakdown = true;
      break;
    }
    if (report.final_relres <= cfg.rel_tol) {
      report.converged = true;
      break;
    }
    report.restarts = cycle;

    for (std::size_t i = 0; i < n; ++i) V[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), T(0));
    g[0] = beta;

    int k = -1;            // last completed Arnoldi column
    bool cycle_done = false;
    for (int j = 0; j < m && !cycle_done; ++j) {
      M.apply(cspan(V[j]), mspan(z));
      A.apply(cspan(z), mspan(w));
      ++report.method_iterations;
      const T wnorm0 = norm2(cspan(w));
      // Modified Gram-Schmidt
      for (int i = 0; i <= j; ++i) {
        const T h = dot(cspan(w), cspan(V[i]));
        H[j][i] = h;
        axpy(-h, cspan(V[i]), mspan(w));
      }
      const T h_next = norm2(cspan(w));
      H[j][j + 1] = h_next;
      bool finite = std::isfinite(h_next);
      for (int i = 0; i <= j && finite; ++i) finite = std::isfinite(H[j][i]);
      if (!finite) {
        report.breakdown = true;
        cycle_done = true;
        break;
      }
      // Apply stored rotations, then form the new one.
      for (int i = 0; i < j; ++i) {
        const T t = cs[i] * H[j][i] + sn[i] * H[j][i + 1];
        H[j][i + 1] = -sn[i] * H[j][i] + cs[i] * H[j][i + 1];
        H[j][i] = t;
      }
      const T denom = std::sqrt(H[j][j] * H[j][j] + h_next * h_next);
      if (denom == T(0)) {
        report.breakdown = true;
        cycle_done = true;
        break;
      }
      cs[j] = H[j][j] / denom;
      sn[j] = h_next / denom;
      H[j][j] = denom;
      g[j + 1] = -sn[j] * g[j];
      g[j] *= cs[j];
      k = j;

      const T estimate = std::abs(g[j + 1]) / bnorm;
      report.resid_history.push_back(estimate);
      const bool happy = h_next <= eps_mach<T> * std::max(wnorm0, eps_mach<T>);
      if (estimate <= cfg.rel_tol) {
        // On happy breakdown the Arnoldi relation is exact and the estimate
        // is the residual; otherwise convergence is only declared after the
        // explicit residual check at the top of the next cycle.
        if (happy) report.converged = true;
        report.final_relres = estimate;
        cycle_done = true;
      } else if (happy) {
        // Krylov space exhausted above tolerance: stationary, flag it.
        report.breakdown = true;
        report.final_relres = estimate;
        cycle_done = true;
      } else {
        for (std::size_t i = 0; i < n; ++i) V[j + 1][i] = w[i] / h_next;
        report.final_relres = estimate;
      }
    }

    // x += M^{-1} (V y) with y from back substitution.
    if (k >= 0) {
      StateVector<T> y(k + 1);
      for (int i = k; i >= 0; --i) {
        T s = g[i];
        for (int l = i + 1; l <= k; ++l) s -= H[l][i] * y[l];
        y[i] = s / H[i][i];
      }
      std::fill(w.begin(), w.end(), T(0));
      for (int i = 0; i <= k; ++i) axpy(y[i], cspan(V[i]), mspan(w));
      M.apply(cspan(w), mspan(z));
      axpy(T(1), cspan(z), mspan(x));
    }
    if (report.converged || report.breakdown) break;
  }

  report.iterations = A.call_count() - calls0;
  return {std::move(x), std::move(report)};
}

template <class T>
std::pair<StateVector<T>, KrylovReport<T>> bicgstab(const LinearOperator<T>& A,
                                                    std::span<const T> b, std::span<const T> x0,
                                                    const Preconditioner<T>& M,
                                                    const KrylovConfig<T>& cfg) {
  const std::size_t n = A.dim();
  JFNK_REQUIRE(b.size() == n && x0.size() == n, "bicgstab: dimension mismatch");

  KrylovReport<T> report;
  const long calls0 = A.call_count();
  StateVector<T> x(x0.begin(), x0.end());
  const T bnorm = detail::rhs_norm_floor(b);

  StateVector<T> r(n), rt(n), p(n, T(0)), v(n, T(0)), phat(n), s(n), shat(n), t(n);
  const bool x0_zero = std::all_of(x0.begin(), x0.end(), [](T q) { return q == T(0); });
  if (x0_zero) {
    std::copy(b.begin(), b.end(), r.begin());
  } else {
    A.apply(cspan(x), mspan(r));
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  }
  rt = r;
  T rnorm = norm2(cspan(r));
  report.final_relres = rnorm / bnorm;
  report.resid_history.push_back(report.final_relres);
  if (report.final_relres <= cfg.rel_tol) {
    report.converged = true;
    report.iterations = A.call_count() - calls0;
    return {std::move(x), std::move(report)};
  }
  const T rtnorm = rnorm;

  T rho = T(1), alpha = T(1), omega = T(1);
  for (int it = 1; it <= cfg.max_outer; ++it) {
    const T rho_new = dot(cspan(rt), cspan(r));
    if (std::abs(rho_new) < eps_mach<T> * rtnorm * rnorm || !std::isfinite(rho_new)) {
      report.breakdown = true;
      break;
    }
    if (it == 1) {
      p = r;
    } else {
      const T beta = (rho_new / rho) * (alpha / omega);
      for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    }
    rho = rho_new;
    M.apply(cspan(p), mspan(phat));
    A.apply(cspan(phat), mspan(v));
    const T rtv = dot(cspan(rt), cspan(v));
    if (std::abs(rtv) < eps_mach<T> * rtnorm * norm2(cspan(v)) || !std::isfinite(rtv)) {
      report.breakdown = true;
      break;
    }
    alpha = rho / rtv;
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    axpy(alpha, cspan(phat), mspan(x));
    ++report.method_iterations;
    const T snorm = norm2(cspan(s));
    report.final_relres = snorm / bnorm;
    report.resid_history.push_back(report.final_relres);
    if (!std::isfinite(snorm)) {
      report.breakdown = true;
      break;
    }
    if (report.final_relres <= cfg.rel_tol) {
      report.converged = true;
      r = s;
      break;
    }
    M.apply(cspan(s), mspan(shat));
    A.apply(cspan(shat), mspan(t));
    const T tt = dot(cspan(t), cspan(t));
    const T ts = dot(cspan(t), cspan(s));
    if (tt == T(0) || !std::isfinite(tt) || !std::isfinite(ts) ||
        std::abs(ts) < eps_mach<T> * std::sqrt(tt) * snorm) {
      r = s;
      report.breakdown = true;
      break;
    }
    omega = ts / tt;
    axpy(omega, cspan(shat), mspan(x));
    for (std::size_t i = 0; i < n; ++i) r[i] = s[i] - omega * t[i];
    rnorm = norm2(cspan(r));
    report.final_relres = rnorm / bnorm;
    report.resid_history.push_back(report.final_relres);
    if (!std::isfinite(rnorm)) {
      report.breakdown = true;
      break;
    }
    if (report.final_relres <= cfg.rel_tol) {
      report.converged = true;
      break;
    }
  }

  report.iterations = A.call_count() - calls0;
  return {std::move(x), std::move(report)};
}

template <class T>
std::pair<StateVector<T>, KrylovReport<T>> cg(const LinearOperator<T>& A, std::span<const T> b,
                                              std::span<const T> x0, const Preconditioner<T>& M,
                                              const KrylovConfig<T>& cfg) {
  const std::size_t n = A.dim();
  JFNK_REQUIRE(b.size() == n && x0.size() == n, "cg: dimension mismatch");

  KrylovReport<T> report;
  const long calls0 = A.call_count();
  StateVector<T> x(x0.begin(), x0.end());
  const T bnorm = detail::rhs_norm_floor(b);

  StateVector<T> r(n), z(n), p(n), Ap(n);
  const bool x0_zero = std::all_of(x0.begin(), x0.end(), [](T q) { return q == T(0); });
  if (x0_zero) {
    std::copy(b.begin(), b.end(), r.begin());
  } else {
    A.apply(cspan(x), mspan(r));
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  }
  report.final_relres = norm2(cspan(r)) / bnorm;
  report.resid_history.push_back(report.final_relres);
  if (report.final_relres <= cfg.rel_tol) {
    report.converged = true;
    report.iterations = A.call_count() - calls0;
    return {std::move(x), std::move(report)};
  }
  M.apply(cspan(r), mspan(z));
  p = z;
  T rz = dot(cspan(r), cspan(z));

  for (int it = 1; it <= cfg.max_outer; ++it) {
    A.apply(cspan(p), mspan(Ap));
    ++report.method_iterations;
    const T pAp = dot(cspan(p), cspan(Ap));
    if (!(pAp > T(0)) || !std::isfinite(pAp)) {
      // Nonpositive curvature: the operator is not SPD.
      report.breakdown = true;
      break;
    }
    const T a = rz / pAp;
    axpy(a, cspan(p), mspan(x));
    axpy(-a, cspan(Ap), mspan(r));
    report.final_relres = norm2(cspan(r)) / bnorm;
    report.resid_history.push_back(report.final_relres);
    if (!std::isfinite(report.final_relres)) {
      report.breakdown = true;
      break;
    }
    if (report.final_relres <= cfg.rel_tol) {
      report.converged = true;
      break;
    }
    M.apply(cspan(r), mspan(z));
    const T rz_new = dot(cspan(r), cspan(z));
    const T beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }

  report.iterations = A.call_count() - calls0;
  return {std::move(x), std::move(report)};
}

template <class T>
std::pair<StateVector<T>, KrylovReport<T>> krylov_solve(const LinearOperator<T>& A,
                                                        std::span<const T> b,
                                                        std::span<const T> x0,
                                                        const Preconditioner<T>& M,
                                                        const KrylovConfig<T>& cfg) {
  switch (cfg.method) {
    case KrylovMethod::GMRES: return gmres(A, b, x0, M, cfg);
    case KrylovMethod::BICGSTAB: return bicgstab(A, b, x0, M, cfg);
    default: return cg(A, b, x0, M, cfg);
  }
}

}  // namespace jfnk
