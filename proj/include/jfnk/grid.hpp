#pragma once

#include <vector>

#include "jfnk/numerics.hpp"

namespace jfnk {

enum class BoundaryKind { Periodic, Dirichlet0, Pec, PeriodicYDirichletX };

// Uniform 2D grid. Periodic axes exclude the duplicate endpoint
// (dx = L/nx); Dirichlet/PEC axes include both endpoints (dx = L/(nx-1)).
// Node (ix, iy) lives at flat index iy*nx + ix within one field plane.
template <class T>
struct GridSpec {
  int nx = 0, ny = 0;
  T x_min{}, x_max{}, y_min{}, y_max{};
  BoundaryKind boundary = BoundaryKind::Periodic;
  T dx{}, dy{};

  static GridSpec make(int nx, int ny, T x_min, T x_max, T y_min, T y_max, BoundaryKind b) {
    JFNK_REQUIRE(nx > 1 && ny > 1, "GridSpec: nx, ny must exceed 1");
    JFNK_REQUIRE(x_max > x_min && y_max > y_min, "GridSpec: empty domain");
    GridSpec g{nx, ny, x_min, x_max, y_min, y_max, b, T(0), T(0)};
    g.dx = (x_max - x_min) / (g.periodic_x() ? T(nx) : T(nx - 1));
    g.dy = (y_max - y_min) / (g.periodic_y() ? T(ny) : T(ny - 1));
    return g;
  }

  bool periodic_x() const { return boundary == BoundaryKind::Periodic; }
  bool periodic_y() const {
    return boundary == BoundaryKind::Periodic || boundary == BoundaryKind::PeriodicYDirichletX;
  }

  int num_nodes() const { return nx * ny; }
  int idx(int ix, int iy) const { return iy * nx + ix; }
  T x(int ix) const { return x_min + T(ix) * dx; }
  T y(int iy) const { return y_min + T(iy) * dy; }

  // True where the residual row is replaced by the boundary condition.
  bool on_boundary(int ix, int iy) const {
    const bool bx = !periodic_x() && (ix == 0 || ix == nx - 1);
    const bool by = !periodic_y() && (iy == 0 || iy == ny - 1);
    return bx || by;
  }

  int wrap_x(int ix) const { return (ix + nx) % nx; }
  int wrap_y(int iy) const { return (iy + ny) % ny; }
};

}  // namespace jfnk
