#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "jfnk/harness.hpp"
#include "jfnk/jvp.hpp"
#include "jfnk/linear_operator.hpp"
#include "jfnk/newton.hpp"

// Verification studies shared by the `verify` CLI subcommand and the
// acceptance suite: JVP cross-checks against a densely assembled Jacobian,
// grid-refinement convergence order, and the discrete energy balance.

namespace jfnk {

// Dense Jacobian assembled column by column from unit tangent seeds.
template <class T, class F>
  requires ResidualFn<F, T>
std::vector<StateVector<T>> dense_jacobian(const F& f, std::span<const T> x) {
  const std::size_t n = f.dim();
  std::vector<StateVector<T>> cols(n);
  StateVector<T> seed(n, T(0)), primal(n), tangent(n);
  JvpWorkspace<T> ws;
  for (std::size_t j = 0; j < n; ++j) {
    seed[j] = T(1);
    cols[j].resize(n);
    jvp(f, x, cspan(seed), mspan(primal), mspan(cols[j]), ws);
    seed[j] = T(0);
  }
  return cols;
}

template <class T>
StateVector<T> dense_apply(const std::vector<StateVector<T>>& cols, std::span<const T> v) {
  StateVector<T> out(cols.size(), T(0));
  for (std::size_t j = 0; j < cols.size(); ++j) axpy(v[j], cspan(cols[j]), mspan(out));
  return out;
}

struct JvpOracleResult {
  std::string problem;
  double ad_vs_dense = 0;  // max relative error over trial directions
  double fd_vs_ad = 0;
};

namespace detail {

template <class T, class F>
JvpOracleResult jvp_oracle_check(const std::string& name, const F& f, std::span<const T> x,
                                 int trials, unsigned seed) {
  const std::size_t n = f.dim();
  const auto cols = dense_jacobian<T>(f, x);
  StateVector<T> fx(n);
  f(x, mspan(fx));

  std::mt19937 rng(seed);
  std::normal_distribution<double> dist;
  JvpOracleResult res{name, 0, 0};
  for (int t = 0; t < trials; ++t) {
    StateVector<T> v(n);
    for (auto& q : v) q = static_cast<T>(dist(rng));
    const T vn = norm2(cspan(v));
    for (auto& q : v) q /= vn;

    const auto [primal, ad] = jvp(f, x, cspan(v));
    const auto dense = dense_apply(cols, cspan(v));
    const auto fd = fd_jvp(f, x, cspan(fx), cspan(v));

    StateVector<T> diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = ad[i] - dense[i];
    const double scale = std::max<double>(norm2(cspan(dense)), eps_mach<T>);
    res.ad_vs_dense = std::max(res.ad_vs_dense, double(norm2(cspan(diff))) / scale);
    for (std::size_t i = 0; i < n; ++i) diff[i] = fd[i] - ad[i];
    const double scale2 = std::max<double>(norm2(cspan(ad)), eps_mach<T>);
    res.fd_vs_ad = std::max(res.fd_vs_ad, double(norm2(cspan(diff))) / scale2);
  }
  return res;
}

}  // namespace detail

// All four benchmark residuals on small grids, FP64, at representative
// nontrivial states.
inline std::vector<JvpOracleResult> jvp_oracle_study(int grid_n = 8, int trials = 5,
                                                     unsigned seed = 2024) {
  using T = double;
  std::vector<JvpOracleResult> out;

  {
    const auto grid = GridSpec<T>::make(grid_n, grid_n, 0, 2 * std::numbers::pi, 0,
                                        2 * std::numbers::pi, BoundaryKind::Periodic);
    auto u0 = burgers_ic(BurgersIc::Tgv, grid);
    const T dt = burgers_dt(cspan(u0), T(0.05), grid, T(1));
    BurgersResidual<T> f(grid, T(0.05), dt, u0);
    out.push_back(detail::jvp_oracle_check<T>("burgers", f, cspan(u0), trials, seed));
  }
  {
    const auto grid = GridSpec<T>::make(grid_n, grid_n, -5, 5, -5, 5, BoundaryKind::Dirichlet0);
    auto w0 = su_olson_ic_rings(grid);
    const T dt = su_olson_dt(grid, T(0.1), T(1));
    auto q = su_olson_source(SuOlsonSource::OrbitingGaussian, T(0.5), grid);
    SuOlsonResidual<T> f(grid, T(0.1), dt, w0, std::move(q));
    out.push_back(detail::jvp_oracle_check<T>("suolson", f, cspan(w0), trials, seed + 1));
  }
  {
    const auto grid =
        GridSpec<T>::make(grid_n, grid_n, -0.5, 0.5, -0.5, 0.5, BoundaryKind::Dirichlet0);
    auto u0 = reaction_diffusion_ic(ReactionDiffusionIc::Gaussian, grid);
    const T dt = reaction_diffusion_dt(T(0.01), grid, T(1));
    ReactionDiffusionResidual<T> f(grid, T(0.01), dt, u0);
    out.push_back(detail::jvp_oracle_check<T>("rd", f, cspan(u0), trials, seed + 2));
  }
  {
    const auto grid = GridSpec<T>::make(grid_n, grid_n, 0, 1, 0, 1, BoundaryKind::Pec);
    MaxwellParams<T> params;
    params.omega = T(18);
    params.chi = T(0.05);
    auto j = maxwell_source(MaxwellSource::SymmetricGaussian, grid);
    MaxwellKerrResidual<T> f(grid, params, j);
    // Deterministic smooth state with |E| bounded away from zero everywhere.
    const int nn = grid.num_nodes();
    StateVector<T> e(4 * nn);
    for (int i = 0; i < nn; ++i) {
      e[i] = T(0.5) + j[i];
      e[nn + i] = T(0.2) + T(0.25) * j[i];
      e[2 * nn + i] = T(0.1) - T(0.5) * j[i];
      e[3 * nn + i] = T(-0.3) + T(0.1) * j[i];
    }
    out.push_back(detail::jvp_oracle_check<T>("maxwell", f, cspan(e), trials, seed + 3));
  }
  return out;
}

// Marches Burgers TGV to an exact final time (last step clipped).
template <class T>
StateVector<T> march_burgers_tgv(int grid_n, T nu, T t_final, JvpStrategy strategy,
                                 const KrylovConfig<T>& kcfg, const NewtonConfig<T>& ncfg) {
  const T two_pi = T(2) * std::numbers::pi_v<T>;
  const auto grid = GridSpec<T>::make(grid_n, grid_n, 0, two_pi, 0, two_pi,
                                      BoundaryKind::Periodic);
  auto x = burgers_ic(BurgersIc::Tgv, grid);
  T t = T(0);
  while (t < t_final) {
    T dt = std::min(burgers_dt(cspan(x), nu, grid, T(1)), t_final - t);
    BurgersResidual<T> f(grid, nu, dt, x);
    auto [x_new, rep] = newton_solve(f, cspan(x), cspan(x), strategy, kcfg, ncfg);
    JFNK_REQUIRE(rep.converged, "march_burgers_tgv: step did not converge");
    x = std::move(x_new);
    t += dt;
  }
  return x;
}

struct SpatialConvergenceResult {
  std::vector<int> grids;
  std::vector<double> errors;  // RMS against the reference at coincident nodes
  double observed_order = 0;
};

inline SpatialConvergenceResult spatial_convergence_study(std::vector<int> grids = {16, 32, 64},
                                                          int reference_n = 128,
                                                          double nu = 0.05,
                                                          double t_final = 1.0) {
  using T = double;
  KrylovConfig<T> kcfg;
  NewtonConfig<T> ncfg;
  const auto ref = march_burgers_tgv<T>(reference_n, nu, t_final, JvpStrategy::AD, kcfg, ncfg);

  SpatialConvergenceResult res;
  res.grids = grids;
  for (int n : grids) {
    JFNK_REQUIRE(reference_n % n == 0, "spatial_convergence: grids must divide the reference");
    const auto sol = march_burgers_tgv<T>(n, nu, t_final, JvpStrategy::AD, kcfg, ncfg);
    const int stride = reference_n / n;
    const int nn = n * n, rn = reference_n * reference_n;
    double sum = 0;
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        const int c = iy * n + ix;
        const int r = (iy * stride) * reference_n + ix * stride;
        const double du = sol[c] - ref[r];
        const double dv = sol[nn + c] - ref[rn + r];
        sum += du * du + dv * dv;
      }
    res.errors.push_back(std::sqrt(sum / (2.0 * nn)));
  }
  // Least-squares slope of log(error) against log(h), h = 1/n.
  const std::size_t m = grids.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double lx = std::log(1.0 / grids[i]), ly = std::log(res.errors[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  res.observed_order = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return res;
}

struct EnergyBalanceResult {
  double defect = 0;  // |sum(U+V/xi) change - dt sum(Q)|
  double bound = 0;   // 100 * tol_newton * ||F(x*,x*)||
  double final_relres = 0;
};

// Fully periodic Su-Olson mode: the Laplacian telescopes, so one converged
// Crank-Nicolson step conserves sum(U + V/xi) up to dt*sum(Q) and the
// residual left by the Newton stop.
inline EnergyBalanceResult energy_balance_study(int grid_n = 32, double xi_in = 1.0) {
  using T = double;
  const T xi = static_cast<T>(xi_in);
  const auto grid = GridSpec<T>::make(grid_n, grid_n, -5, 5, -5, 5, BoundaryKind::Periodic);
  auto w = su_olson_ic_rings(grid);
  const T dt = su_olson_dt(grid, xi, T(1));
  auto q = su_olson_source(SuOlsonSource::OrbitingGaussian, dt / T(2), grid);
  SuOlsonResidual<T> f(grid, xi, dt, w, q);

  KrylovConfig<T> kcfg;
  NewtonConfig<T> ncfg;
  StateVector<T> f_star(f.dim());
  f(cspan(w), mspan(f_star));
  const T f_star_norm = norm2(cspan(f_star));

  auto [w_new, rep] = newton_solve(f, cspan(w), cspan(w), JvpStrategy::AD, kcfg, ncfg);
  JFNK_REQUIRE(rep.converged, "energy_balance: step did not converge");

  const int nn = grid.num_nodes();
  T before = T(0), after = T(0), qsum = T(0);
  for (int i = 0; i < nn; ++i) {
    before += w[i] + w[nn + i] / xi;
    after += w_new[i] + w_new[nn + i] / xi;
    qsum += q[i];
  }
  EnergyBalanceResult res;
  res.defect = std::abs(after - before - dt * qsum);
  res.bound = 100.0 * ncfg.tol_newton * f_star_norm;
  res.final_relres = rep.final_relres;
  return res;
}

}  // namespace jfnk
