#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "jfnk/dual.hpp"
#include "jfnk/grid.hpp"
#include "jfnk/krylov.hpp"
#include "jfnk/numerics.hpp"

// Time-harmonic Maxwell in a Kerr medium (2D TE), curl-curl with
// second-order central differences, PEC cavity. Complex fields are carried
// as real pairs because eps(E) depends on |E|, which is non-holomorphic:
// the Gateaux derivative is R-linear only, so the Krylov solvers operate on
// the 4n real system. State layout: [Ex_re, Ex_im, Ey_re, Ey_im].

namespace jfnk {

enum class MaxwellSource { SymmetricGaussian, AntisymmetricDipole };

template <class T>
struct MaxwellParams {
  T omega = T(18);
  T chi = T(0.05);
  T eps0 = T(1);
  T mu0 = T(1);
  T loss_factor = T(0.05);  // eps(E) = eps0 (1 - loss i)(1 + chi |E|)
  T cslp_shift = T(0.5);
};

template <class T>
class MaxwellKerrResidual {
 public:
  MaxwellKerrResidual(GridSpec<T> grid, MaxwellParams<T> params, StateVector<T> current)
      : grid_(grid), p_(params), j_(std::move(current)) {
    JFNK_REQUIRE(grid_.boundary == BoundaryKind::Pec, "maxwell: PEC grids only");
    JFNK_REQUIRE(j_.size() == dim(), "maxwell: source size mismatch");
  }

  std::size_t dim() const { return 4 * static_cast<std::size_t>(grid_.num_nodes()); }
  const GridSpec<T>& grid() const { return grid_; }
  const MaxwellParams<T>& params() const { return p_; }

  // Curl-curl as two nested centered curls through the scalar B_z =
  // Dx Ey - Dy Ex, so discrete gradient fields are annihilated exactly
  // (composing the mixed term as Dx(Dy .) while using a one-shot narrow
  // second difference for the diagonal term splits the gradient cluster
  // across zero and no capped Krylov solve can resolve it). PEC walls use
  // mirror ghosts: tangential components odd, normal components even.
  template <class S>
  void operator()(std::span<const S> e, std::span<S> out) const {
    using std::sqrt;
    const int nx = grid_.nx, ny = grid_.ny, nn = grid_.num_nodes();
    const T hx = T(1) / (T(2) * grid_.dx), hy = T(1) / (T(2) * grid_.dy);
    const T w2me = p_.omega * p_.omega * p_.mu0 * p_.eps0;
    const T wm = p_.omega * p_.mu0;
    const T loss = p_.loss_factor;

    const std::span<const S> exr = e.subspan(0, nn), exi = e.subspan(nn, nn);
    const std::span<const S> eyr = e.subspan(2 * nn, nn), eyi = e.subspan(3 * nn, nn);
    const T* jxr = j_.data();
    const T* jxi = j_.data() + nn;
    const T* jyr = j_.data() + 2 * nn;
    const T* jyi = j_.data() + 3 * nn;

    // Ey is tangential on x-walls, Ex on y-walls.
    const auto ghost_x = [nx](std::span<const S> p, int ix, int iy, bool odd) -> S {
      T sign = T(1);
      if (ix < 0) {
        ix = -ix;
        if (odd) sign = T(-1);
      } else if (ix > nx - 1) {
        ix = 2 * (nx - 1) - ix;
        if (odd) sign = T(-1);
      }
      return sign * p[iy * nx + ix];
    };
    const auto ghost_y = [nx, ny](std::span<const S> p, int ix, int iy, bool odd) -> S {
      T sign = T(1);
      if (iy < 0) {
        iy = -iy;
        if (odd) sign = T(-1);
      } else if (iy > ny - 1) {
        iy = 2 * (ny - 1) - iy;
        if (odd) sign = T(-1);
      }
      return sign * p[iy * nx + ix];
    };

    std::vector<S> bzr(nn), bzi(nn);
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix) {
        const S dx_eyr = (ghost_x(eyr, ix + 1, iy, true) - ghost_x(eyr, ix - 1, iy, true)) * hx;
        const S dx_eyi = (ghost_x(eyi, ix + 1, iy, true) - ghost_x(eyi, ix - 1, iy, true)) * hx;
        const S dy_exr = (ghost_y(exr, ix, iy + 1, true) - ghost_y(exr, ix, iy - 1, true)) * hy;
        const S dy_exi = (ghost_y(exi, ix, iy + 1, true) - ghost_y(exi, ix, iy - 1, true)) * hy;
        bzr[iy * nx + ix] = dx_eyr - dy_exr;
        bzi[iy * nx + ix] = dx_eyi - dy_exi;
      }

    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        const int id = grid_.idx(ix, iy);
        if (grid_.on_boundary(ix, iy)) {
          out[id] = exr[id];
          out[nn + id] = exi[id];
          out[2 * nn + id] = eyr[id];
          out[3 * nn + id] = eyi[id];
          continue;
        }
        // |E| with an eps floor inside the sqrt to keep the derivative
        // finite at field zeros (Born initialization stays away from zero
        // except on PEC rows, which are replaced anyway).
        const S mag2 = exr[id] * exr[id] + exi[id] * exi[id] + eyr[id] * eyr[id] +
                       eyi[id] * eyi[id];
        const S s = T(1) + p_.chi * sqrt(floor_guard(mag2, eps_mach<T>));

        const S dy_bzr = (bzr[id + nx] - bzr[id - nx]) * hy;
        const S dy_bzi = (bzi[id + nx] - bzi[id - nx]) * hy;
        const S dx_bzr = (bzr[id + 1] - bzr[id - 1]) * hx;
        const S dx_bzi = (bzi[id + 1] - bzi[id - 1]) * hx;

        out[id] = dy_bzr - w2me * (s * (exr[id] + loss * exi[id])) + wm * jxi[id];
        out[nn + id] = dy_bzi - w2me * (s * (exi[id] - loss * exr[id])) - wm * jxr[id];
        out[2 * nn + id] = -dx_bzr - w2me * (s * (eyr[id] + loss * eyi[id])) + wm * jyi[id];
        out[3 * nn + id] = -dx_bzi - w2me * (s * (eyi[id] - loss * eyr[id])) - wm * jyr[id];
      }
    }
  }

 private:
  GridSpec<T> grid_;
  MaxwellParams<T> p_;
  StateVector<T> j_;
};

// Block-diagonal complex shifted Laplacian: pointwise division by
// M_xx = 2/dy^2 - w^2 mu0 eps_pre (Ex) and M_yy = 2/dx^2 - w^2 mu0 eps_pre
// (Ey), with eps_pre = eps(E)(1 - shift i). PEC rows pass through.
template <class T>
Preconditioner<T> maxwell_cslp(const MaxwellParams<T>& params, std::span<const T> e_current,
                               const GridSpec<T>& grid) {
  const int nn = grid.num_nodes();
  JFNK_REQUIRE(e_current.size() == 4 * static_cast<std::size_t>(nn),
               "maxwell_cslp: state size mismatch");
  // (1 - loss i)(1 - shift i) = (1 - loss*shift) - (loss + shift) i
  const T pre_re = T(1) - params.loss_factor * params.cslp_shift;
  const T pre_im = -(params.loss_factor + params.cslp_shift);
  const T w2m = params.omega * params.omega * params.mu0;
  const T dxx = T(2) / (grid.dx * grid.dx), dyy = T(2) / (grid.dy * grid.dy);

  // Precompute inverse blocks; nodes with |M| under eps fall back to identity.
  std::vector<T> inv(4 * nn, T(0));  // [Mxx_re, Mxx_im, Myy_re, Myy_im] of 1/M
  std::vector<char> use(2 * nn, 0);
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix) {
      const int id = grid.idx(ix, iy);
      if (grid.on_boundary(ix, iy)) continue;
      const T mag2 = e_current[id] * e_current[id] + e_current[nn + id] * e_current[nn + id] +
                     e_current[2 * nn + id] * e_current[2 * nn + id] +
                     e_current[3 * nn + id] * e_current[3 * nn + id];
      const T s = T(1) + params.chi * std::sqrt(floor_guard(mag2, eps_mach<T>));
      const T er = params.eps0 * s * pre_re, ei = params.eps0 * s * pre_im;
      const T mxx_re = dyy - w2m * er, mxx_im = -w2m * ei;
      const T myy_re = dxx - w2m * er, myy_im = -w2m * ei;
      const T axx = mxx_re * mxx_re + mxx_im * mxx_im;
      const T ayy = myy_re * myy_re + myy_im * myy_im;
      if (std::sqrt(axx) >= eps_mach<T>) {
        inv[id] = mxx_re / axx;
        inv[nn + id] = -mxx_im / axx;
        use[id] = 1;
      }
      if (std::sqrt(ayy) >= eps_mach<T>) {
        inv[2 * nn + id] = myy_re / ayy;
        inv[3 * nn + id] = -myy_im / ayy;
        use[nn + id] = 1;
      }
    }

  return Preconditioner<T>([inv = std::move(inv), use = std::move(use), nn](
                               std::span<const T> v, std::span<T> out) {
    for (int id = 0; id < nn; ++id) {
      if (use[id]) {
        out[id] = v[id] * inv[id] - v[nn + id] * inv[nn + id];
        out[nn + id] = v[id] * inv[nn + id] + v[nn + id] * inv[id];
      } else {
        out[id] = v[id];
        out[nn + id] = v[nn + id];
      }
      if (use[nn + id]) {
        out[2 * nn + id] = v[2 * nn + id] * inv[2 * nn + id] - v[3 * nn + id] * inv[3 * nn + id];
        out[3 * nn + id] = v[2 * nn + id] * inv[3 * nn + id] + v[3 * nn + id] * inv[2 * nn + id];
      } else {
        out[2 * nn + id] = v[2 * nn + id];
        out[3 * nn + id] = v[3 * nn + id];
      }
    }
  });
}

template <class T>
StateVector<T> maxwell_source(MaxwellSource kind, const GridSpec<T>& grid) {
  const int nn = grid.num_nodes();
  StateVector<T> j(4 * nn, T(0));
  const T sig = T(0.05), x0 = T(0.5);
  const T inv = T(1) / (T(2) * sig * sig);
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix) {
      const T x = grid.x(ix), y = grid.y(iy);
      const int id = grid.idx(ix, iy);
      if (kind == MaxwellSource::SymmetricGaussian) {
        const T y0 = T(0.5);
        j[id] = std::exp(-((x - x0) * (x - x0) + (y - y0) * (y - y0)) * inv);
      } else {
        const T y1 = T(0.4), y2 = T(0.6);
        j[id] = std::exp(-((x - x0) * (x - x0) + (y - y1) * (y - y1)) * inv) -
                std::exp(-((x - x0) * (x - x0) + (y - y2) * (y - y2)) * inv);
      }
    }
  return j;
}

template <class T>
struct BornGuess {
  StateVector<T> field;
  KrylovReport<T> report;
};

// Newton's initial guess from the Born approximation: solve the linear
// problem with eps frozen at its zero-field value (chi = 0) using GMRES
// with the CSLP preconditioner.
template <class T>
BornGuess<T> maxwell_born_guess(const MaxwellParams<T>& params, const StateVector<T>& current,
                                const GridSpec<T>& grid, KrylovConfig<T> kcfg) {
  JFNK_REQUIRE(all_finite(cspan(current)), "maxwell_born_guess: non-finite source");
  MaxwellParams<T> linear = params;
  linear.chi = T(0);
  MaxwellKerrResidual<T> res(grid, linear, current);
  const std::size_t n = res.dim();
  StateVector<T> zero(n, T(0)), f0(n), rhs(n);
  res(cspan(zero), mspan(f0));
  for (std::size_t i = 0; i < n; ++i) rhs[i] = -f0[i];
  auto A = make_operator<T>(res, cspan(zero), cspan(f0), JvpStrategy::AD);
  auto M = maxwell_cslp(linear, cspan(zero), grid);
  kcfg.method = KrylovMethod::GMRES;
  auto [field, report] = gmres(A, cspan(rhs), cspan(zero), M, kcfg);
  return {std::move(field), std::move(report)};
}

}  // namespace jfnk
