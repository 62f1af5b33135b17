#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "jfnk/dual.hpp"
#include "jfnk/grid.hpp"
#include "jfnk/numerics.hpp"

// 2D viscous Burgers, Crank-Nicolson in time, second-order central
// differences in space, fully periodic. State layout: [u-plane, v-plane].

namespace jfnk {

enum class BurgersIc { Tgv, Dsl, FourVortex };

template <class T>
class BurgersResidual {
 public:
  BurgersResidual(GridSpec<T> grid, T nu, T dt, StateVector<T> u_prev)
      : grid_(grid), nu_(nu), dt_(dt), u_prev_(std::move(u_prev)) {
    JFNK_REQUIRE(grid_.boundary == BoundaryKind::Periodic, "burgers: periodic grids only");
    JFNK_REQUIRE(u_prev_.size() == dim(), "burgers: previous-state size mismatch");
    xp_.resize(grid_.nx);
    xm_.resize(grid_.nx);
    for (int i = 0; i < grid_.nx; ++i) {
      xp_[i] = grid_.wrap_x(i + 1);
      xm_[i] = grid_.wrap_x(i - 1);
    }
    yp_.resize(grid_.ny);
    ym_.resize(grid_.ny);
    for (int i = 0; i < grid_.ny; ++i) {
      yp_[i] = grid_.wrap_y(i + 1);
      ym_[i] = grid_.wrap_y(i - 1);
    }
    // The Un half of the trapezoid is state-independent; evaluate it once.
    context_.resize(dim());
    eval_half(cspan(u_prev_), mspan(context_));
  }

  std::size_t dim() const { return 2 * static_cast<std::size_t>(grid_.num_nodes()); }
  const GridSpec<T>& grid() const { return grid_; }

  // F = Uk - Un + (dt/2)[Adv(Uk) - nu Lap(Uk)] + (dt/2)[Adv(Un) - nu Lap(Un)]
  template <class S>
  void operator()(std::span<const S> uk, std::span<S> out) const {
    eval_half(uk, out);
    const std::size_t n = dim();
    for (std::size_t i = 0; i < n; ++i) out[i] = uk[i] + (out[i] + (context_[i] - u_prev_[i]));
  }

 private:
  // (dt/2)(Adv(U) - nu Lap(U)) for one state, both velocity components.
  template <class S>
  void eval_half(std::span<const S> U, std::span<S> out) const {
    const int nx = grid_.nx, ny = grid_.ny, nn = grid_.num_nodes();
    const T hx = T(1) / (T(2) * grid_.dx), hy = T(1) / (T(2) * grid_.dy);
    const T ax = T(1) / (grid_.dx * grid_.dx), ay = T(1) / (grid_.dy * grid_.dy);
    const T half_dt = dt_ / T(2);
    const std::span<const S> u = U.subspan(0, nn);
    const std::span<const S> v = U.subspan(nn, nn);
    for (int iy = 0; iy < ny; ++iy) {
      const int ym = ym_[iy] * nx, yp = yp_[iy] * nx, y0 = iy * nx;
      for (int ix = 0; ix < nx; ++ix) {
        const int xm = xm_[ix], xp = xp_[ix];
        const int id = y0 + ix;
        const S ux = (u[y0 + xp] - u[y0 + xm]) * hx;
        const S uy = (u[yp + ix] - u[ym + ix]) * hy;
        const S vx = (v[y0 + xp] - v[y0 + xm]) * hx;
        const S vy = (v[yp + ix] - v[ym + ix]) * hy;
        const S lap_u = (u[y0 + xp] - T(2) * u[id] + u[y0 + xm]) * ax +
                        (u[yp + ix] - T(2) * u[id] + u[ym + ix]) * ay;
        const S lap_v = (v[y0 + xp] - T(2) * v[id] + v[y0 + xm]) * ax +
                        (v[yp + ix] - T(2) * v[id] + v[ym + ix]) * ay;
        out[id] = half_dt * (u[id] * ux + v[id] * uy - nu_ * lap_u);
        out[nn + id] = half_dt * (u[id] * vx + v[id] * vy - nu_ * lap_v);
      }
    }
  }

  GridSpec<T> grid_;
  T nu_, dt_;
  StateVector<T> u_prev_;
  StateVector<T> context_;
  std::vector<int> xp_, xm_, yp_, ym_;
};

// CFL bound: advective in each direction plus the diffusive limit, with an
// eps floor on the velocity maxima for quiescent fields.
template <class T>
T burgers_dt(std::span<const T> U, T nu, const GridSpec<T>& grid, T courant) {
  JFNK_REQUIRE(courant > T(0), "burgers_dt: courant must be positive");
  const int nn = grid.num_nodes();
  JFNK_REQUIRE(U.size() == 2 * static_cast<std::size_t>(nn), "burgers_dt: state size mismatch");
  const T umax = std::max(norm_inf(U.subspan(0, nn)), eps_mach<T>);
  const T vmax = std::max(norm_inf(U.subspan(nn, nn)), eps_mach<T>);
  T dt = std::min(grid.dx / umax, grid.dy / vmax);
  if (nu > T(0)) {
    const T diff = T(1) / (T(2) * nu * (T(1) / (grid.dx * grid.dx) + T(1) / (grid.dy * grid.dy)));
    dt = std::min(dt, diff);
  }
  return courant * dt;
}

template <class T>
StateVector<T> burgers_ic(BurgersIc kind, const GridSpec<T>& grid) {
  const int nx = grid.nx, ny = grid.ny, nn = grid.num_nodes();
  StateVector<T> U(2 * nn, T(0));
  switch (kind) {
    case BurgersIc::Tgv:
      for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
          const T x = grid.x(ix), y = grid.y(iy);
          U[grid.idx(ix, iy)] = std::sin(x) * std::cos(y);
          U[nn + grid.idx(ix, iy)] = -std::cos(x) * std::sin(y);
        }
      break;
    case BurgersIc::Dsl: {
      const T rho = T(30), delta = T(0.05);
      const T pi = std::numbers::pi_v<T>;
      for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
          const T x = grid.x(ix), y = grid.y(iy);
          U[grid.idx(ix, iy)] = y <= pi ? std::tanh(rho * (y - pi / T(2)))
                                        : std::tanh(rho * (T(3) * pi / T(2) - y));
          U[nn + grid.idx(ix, iy)] = delta * std::sin(x);
        }
      break;
    }
    case BurgersIc::FourVortex: {
      const T pi = std::numbers::pi_v<T>;
      const T R2 = T(0.25);  // R = 0.5
      const T cx[4] = {pi / T(2), T(3) * pi / T(2), T(3) * pi / T(2), pi / T(2)};
      const T cy[4] = {pi / T(2), pi / T(2), T(3) * pi / T(2), T(3) * pi / T(2)};
      const T gamma[4] = {T(1), T(-1), T(1), T(-1)};
      for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
          const T x = grid.x(ix), y = grid.y(iy);
          T u = T(0), v = T(0);
          for (int k = 0; k < 4; ++k) {
            const T rx = x - cx[k], ry = y - cy[k];
            const T w = gamma[k] * std::exp(-(rx * rx + ry * ry) / R2);
            u += -ry * w;
            v += rx * w;
          }
          U[grid.idx(ix, iy)] = u;
          U[nn + grid.idx(ix, iy)] = v;
        }
      break;
    }
    default: JFNK_REQUIRE(false, "burgers_ic: unknown kind");
  }
  return U;
}

}  // namespace jfnk
