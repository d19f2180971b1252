#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <utility>

#include "honeydirac/error.hpp"
#include "honeydirac/fft.hpp"
#include "honeydirac/lattice.hpp"

namespace honeydirac {

// Uniform periodic grid on [0, L1) x [0, L2).
struct RectGrid {
  double L1 = 1.0, L2 = 1.0;
  std::size_t nx = 1, ny = 1;

  double dx() const { return L1 / double(nx); }
  double dy() const { return L2 / double(ny); }
  double x(std::size_t i) const { return L1 * double(i) / double(nx); }
  double y(std::size_t j) const { return L2 * double(j) / double(ny); }
  double cell_volume() const { return dx() * dy(); }
  double area() const { return L1 * L2; }
  std::size_t size() const { return nx * ny; }

  // Angular wavenumbers of FFT slots.
  double xi1(std::size_t i) const { return 2.0 * std::numbers::pi * double(signed_index(i, nx)) / L1; }
  double xi2(std::size_t j) const { return 2.0 * std::numbers::pi * double(signed_index(j, ny)) / L2; }

  // Integer frequency index of a wavevector; throws if it is off the lattice.
  std::pair<long, long> frequency_index(const Vec2& xi, double tol = 1e-8) const {
    const double f1 = xi.x() * L1 / (2.0 * std::numbers::pi);
    const double f2 = xi.y() * L2 / (2.0 * std::numbers::pi);
    const double r1 = std::round(f1), r2 = std::round(f2);
    require(std::abs(f1 - r1) <= tol * (1.0 + std::abs(f1)) && std::abs(f2 - r2) <= tol * (1.0 + std::abs(f2)),
            ErrorCode::non_commensurate_grid, "wavevector is not on the grid's frequency lattice");
    return {long(r1), long(r2)};
  }

  bool same_as(const RectGrid& o, double tol = 1e-12) const {
    return nx == o.nx && ny == o.ny && std::abs(L1 - o.L1) <= tol * L1 && std::abs(L2 - o.L2) <= tol * L2;
  }
};

// Fine grid for fields oscillating on scale eps: the box holds cellsX x cellsY
// rectangular supercells of size (eps a sqrt3, eps a) spanned by v1 + v2 and v1 - v2.
struct CommensurateGrid : RectGrid {
  double eps = 1.0;
  double a = 1.0;
  int cellsX = 0, cellsY = 0;
  int ppcX = 0, ppcY = 0;

  // Frequency index of k_m / eps.
  std::pair<long, long> dual_index_shift(const DualIndex& m) const {
    return {long(cellsX) * (m.m1 + m.m2), long(cellsY) * (m.m1 - m.m2)};
  }
  // Frequency index of K / eps (K lies along x2).
  std::pair<long, long> K_shift(Anchor anchor = Anchor::K) const {
    const long s = 2L * cellsY / 3;
    if (anchor == Anchor::origin) return {0, 0};
    return {0, anchor == Anchor::K ? s : -s};
  }
};

inline CommensurateGrid build_commensurate_grid(const LatticeGeometry& g, double eps, int cellsX, int cellsY,
                                                int ppcX, int ppcY) {
  require(eps > 0.0 && eps <= 1.0, ErrorCode::invalid_parameter, "eps must lie in (0, 1]");
  require(cellsX >= 1 && cellsY >= 1, ErrorCode::invalid_parameter, "cell counts must be positive");
  require(ppcX >= 2 && ppcY >= 2, ErrorCode::invalid_parameter, "points per cell must be >= 2");
  require(cellsY % 3 == 0, ErrorCode::non_commensurate_grid,
          "cellsY must be divisible by 3 so that K/eps lies on the frequency lattice");
  CommensurateGrid c;
  c.eps = eps;
  c.a = g.a;
  c.cellsX = cellsX;
  c.cellsY = cellsY;
  c.ppcX = ppcX;
  c.ppcY = ppcY;
  c.L1 = double(cellsX) * eps * g.a * std::sqrt(3.0);
  c.L2 = double(cellsY) * eps * g.a;
  c.nx = std::size_t(cellsX) * std::size_t(ppcX);
  c.ny = std::size_t(cellsY) * std::size_t(ppcY);
  return c;
}

}  // namespace honeydirac
