#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "jfnk/dual.hpp"
#include "jfnk/grid.hpp"
#include "jfnk/numerics.hpp"

// Su-Olson non-equilibrium radiation diffusion: radiation energy U coupled
// to material energy V, Crank-Nicolson in time. State layout: [U-plane,
// V-plane]. The classic 1D-profile mode uses periodic y / Dirichlet x; the
// dynamic 2D mode uses full Dirichlet; a fully periodic mode exists for
// conservation checks.

namespace jfnk {

enum class SuOlsonSource { StaticBox, OrbitingGaussian };

template <class T>
struct SuOlsonOrbit {
  T q0 = T(1);
  T sigma = T(0.4);
  T radius = T(2.5);
  T angular_speed = T(0.5);
};

template <class T>
class SuOlsonResidual {
 public:
  // q is the source evaluated at the midpoint time of the step.
  SuOlsonResidual(GridSpec<T> grid, T xi, T dt, StateVector<T> w_prev, StateVector<T> q)
      : grid_(grid), xi_(xi), dt_(dt), w_prev_(std::move(w_prev)), q_(std::move(q)) {
    JFNK_REQUIRE(w_prev_.size() == dim(), "su_olson: previous-state size mismatch");
    JFNK_REQUIRE(q_.size() == static_cast<std::size_t>(grid_.num_nodes()),
                 "su_olson: source size mismatch");
  }

  std::size_t dim() const { return 2 * static_cast<std::size_t>(grid_.num_nodes()); }
  const GridSpec<T>& grid() const { return grid_; }

  // F_U = Uk - Un - (dt/2)[(1/3)Lap(Uk+Un) - (Uk+Un) + (Vk+Vn) + 2Q]
  // F_V = Vk - Vn - (dt/2) xi [(Uk+Un) - (Vk+Vn)]
  template <class S>
  void operator()(std::span<const S> wk, std::span<S> out) const {
    const int nx = grid_.nx, ny = grid_.ny, nn = grid_.num_nodes();
    const T ax = T(1) / (T(3) * grid_.dx * grid_.dx), ay = T(1) / (T(3) * grid_.dy * grid_.dy);
    const T half_dt = dt_ / T(2);
    const std::span<const S> Uk = wk.subspan(0, nn);
    const std::span<const S> Vk = wk.subspan(nn, nn);
    const T* Un = w_prev_.data();
    const T* Vn = w_prev_.data() + nn;
    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        const int id = grid_.idx(ix, iy);
        const S su = Uk[id] + Un[id];
        const S sv = Vk[id] + Vn[id];
        if (grid_.on_boundary(ix, iy)) {
          out[id] = Uk[id];
        } else {
          const int xm = grid_.periodic_x() ? grid_.idx(grid_.wrap_x(ix - 1), iy)
                                            : grid_.idx(ix - 1, iy);
          const int xp = grid_.periodic_x() ? grid_.idx(grid_.wrap_x(ix + 1), iy)
                                            : grid_.idx(ix + 1, iy);
          const int ym = grid_.periodic_y() ? grid_.idx(ix, grid_.wrap_y(iy - 1))
                                            : grid_.idx(ix, iy - 1);
          const int yp = grid_.periodic_y() ? grid_.idx(ix, grid_.wrap_y(iy + 1))
                                            : grid_.idx(ix, iy + 1);
          const S lap = ((Uk[xp] + Un[xp]) - T(2) * su + (Uk[xm] + Un[xm])) * ax +
                        ((Uk[yp] + Un[yp]) - T(2) * su + (Uk[ym] + Un[ym])) * ay;
          out[id] = Uk[id] - Un[id] - half_dt * (lap - su + sv + T(2) * q_[id]);
        }
        out[nn + id] = Vk[id] - Vn[id] - half_dt * xi_ * (su - sv);
      }
    }
  }

 private:
  GridSpec<T> grid_;
  T xi_, dt_;
  StateVector<T> w_prev_;
  StateVector<T> q_;
};

// dt = min(C min(dx,dy)^2 / D, C/(xi + delta)) with D = 1/3.
template <class T>
T su_olson_dt(const GridSpec<T>& grid, T xi, T courant) {
  JFNK_REQUIRE(courant > T(0), "su_olson_dt: courant must be positive");
  JFNK_REQUIRE(xi >= T(0), "su_olson_dt: xi must be nonnegative");
  const T delta_reg = T(1e-8);
  const T h = std::min(grid.dx, grid.dy);
  return std::min(courant * h * h / (T(1) / T(3)), courant / (xi + delta_reg));
}

template <class T>
StateVector<T> su_olson_source(SuOlsonSource kind, T t, const GridSpec<T>& grid,
                               const SuOlsonOrbit<T>& orbit = {}) {
  JFNK_REQUIRE(t >= T(0), "su_olson_source: negative time");
  const int nn = grid.num_nodes();
  StateVector<T> q(nn, T(0));
  if (kind == SuOlsonSource::StaticBox) {
    const T half_width = T(0.5);
    for (int iy = 0; iy < grid.ny; ++iy)
      for (int ix = 0; ix < grid.nx; ++ix)
        if (std::abs(grid.x(ix)) <= half_width && std::abs(grid.y(iy)) <= half_width)
          q[grid.idx(ix, iy)] = orbit.q0;
  } else {
    const T cx = orbit.radius * std::cos(orbit.angular_speed * t);
    const T cy = orbit.radius * std::sin(orbit.angular_speed * t);
    const T inv = T(1) / (T(2) * orbit.sigma * orbit.sigma);
    for (int iy = 0; iy < grid.ny; ++iy)
      for (int ix = 0; ix < grid.nx; ++ix) {
        const T rx = grid.x(ix) - cx, ry = grid.y(iy) - cy;
        q[grid.idx(ix, iy)] = orbit.q0 * std::exp(-(rx * rx + ry * ry) * inv);
      }
  }
  return q;
}

// Dynamic-mode initial condition: decaying concentric Gaussian rings in the
// radiation field, cold material.
template <class T>
StateVector<T> su_olson_ic_rings(const GridSpec<T>& grid) {
  const int nn = grid.num_nodes();
  StateVector<T> w(2 * nn, T(0));
  const T radii[2] = {T(1.5), T(3.0)};
  const T amps[2] = {T(1), T(0.5)};
  const T sig = T(0.3);
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix) {
      if (grid.on_boundary(ix, iy)) continue;
      const T r = std::sqrt(grid.x(ix) * grid.x(ix) + grid.y(iy) * grid.y(iy));
      T u = T(0);
      for (int k = 0; k < 2; ++k) {
        const T d = r - radii[k];
        u += amps[k] * std::exp(-d * d / (T(2) * sig * sig));
      }
      w[grid.idx(ix, iy)] = u;
    }
  return w;
}

}  // namespace jfnk
