#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "jfnk/dual.hpp"
#include "jfnk/grid.hpp"
#include "jfnk/numerics.hpp"

// Scalar reaction-diffusion with a cubic sink, Crank-Nicolson in time,
// homogeneous Dirichlet boundary. The linearized operator is SPD on the
// boundary-zero subspace, which makes this the CG benchmark.

namespace jfnk {

enum class ReactionDiffusionIc { Gaussian, MultiGaussian, Sinusoidal };

template <class T>
class ReactionDiffusionResidual {
 public:
  ReactionDiffusionResidual(GridSpec<T> grid, T diffusion, T dt, StateVector<T> u_prev)
      : grid_(grid), d_(diffusion), dt_(dt), u_prev_(std::move(u_prev)) {
    JFNK_REQUIRE(u_prev_.size() == dim(), "reaction_diffusion: previous-state size mismatch");
  }

  std::size_t dim() const { return static_cast<std::size_t>(grid_.num_nodes()); }
  const GridSpec<T>& grid() const { return grid_; }

  // F = uk - un - (dt/2)[D Lap(uk+un) - (uk^3 + un^3)]; boundary rows F = uk.
  template <class S>
  void operator()(std::span<const S> uk, std::span<S> out) const {
    const int nx = grid_.nx, ny = grid_.ny;
    const T ax = d_ / (grid_.dx * grid_.dx), ay = d_ / (grid_.dy * grid_.dy);
    const T half_dt = dt_ / T(2);
    const T* un = u_prev_.data();
    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        const int id = grid_.idx(ix, iy);
        if (grid_.on_boundary(ix, iy)) {
          out[id] = uk[id];
          continue;
        }
        const S s0 = uk[id] + un[id];
        const S sxm = uk[id - 1] + un[id - 1];
        const S sxp = uk[id + 1] + un[id + 1];
        const S sym = uk[id - nx] + un[id - nx];
        const S syp = uk[id + nx] + un[id + nx];
        const S lap = (sxp - T(2) * s0 + sxm) * ax + (syp - T(2) * s0 + sym) * ay;
        const S cubic = uk[id] * uk[id] * uk[id] + un[id] * un[id] * un[id];
        out[id] = uk[id] - un[id] - half_dt * (lap - cubic);
      }
    }
  }

 private:
  GridSpec<T> grid_;
  T d_, dt_;
  StateVector<T> u_prev_;
};

template <class T>
T reaction_diffusion_dt(T diffusion, const GridSpec<T>& grid, T courant) {
  JFNK_REQUIRE(courant > T(0), "reaction_diffusion_dt: courant must be positive");
  JFNK_REQUIRE(diffusion > T(0), "reaction_diffusion_dt: diffusion must be positive");
  return courant * grid.dx * grid.dx / diffusion;
}

template <class T>
StateVector<T> reaction_diffusion_ic(ReactionDiffusionIc kind, const GridSpec<T>& grid) {
  const int nn = grid.num_nodes();
  StateVector<T> u(nn, T(0));
  const T pi = std::numbers::pi_v<T>;
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix) {
      if (grid.on_boundary(ix, iy)) continue;
      const T x = grid.x(ix), y = grid.y(iy);
      T val = T(0);
      switch (kind) {
        case ReactionDiffusionIc::Gaussian: {
          const T sig = T(0.1);
          val = std::exp(-(x * x + y * y) / (T(2) * sig * sig));
          break;
        }
        case ReactionDiffusionIc::MultiGaussian: {
          const T sig = T(0.08), c = T(0.25);
          const T px[4] = {c, -c, c, -c}, py[4] = {c, c, -c, -c};
          for (int k = 0; k < 4; ++k) {
            const T rx = x - px[k], ry = y - py[k];
            val += std::exp(-(rx * rx + ry * ry) / (T(2) * sig * sig));
          }
          break;
        }
        case ReactionDiffusionIc::Sinusoidal: {
          const T kx = T(4), ky = T(4);
          val = abs_smoothed(std::sin(kx * pi * x) * std::sin(ky * pi * y));
          break;
        }
        default: JFNK_REQUIRE(false, "reaction_diffusion_ic: unknown kind");
      }
      u[grid.idx(ix, iy)] = val;
    }
  return u;
}

}  // namespace jfnk
