#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "honeydirac/error.hpp"
#include "honeydirac/fft.hpp"
#include "honeydirac/grid.hpp"
#include "honeydirac/lattice.hpp"

namespace honeydirac {

// Finite Fourier series V(y) = sum_m Vhat(m) exp(i k_m . y).
struct FourierPotential {
  LatticeGeometry geom;
  std::map<DualIndex, cplx> coeffs;
  double V0 = 0.0;
  std::vector<std::string> warnings;

  cplx coeff(const DualIndex& m) const {
    auto it = coeffs.find(m);
    return it == coeffs.end() ? cplx(0.0) : it->second;
  }

  cplx value_at(const Vec2& y) const {
    cplx s = 0.0;
    for (const auto& [m, c] : coeffs) s += c * std::exp(cplx(0.0, geom.dual_vector(m).dot(y)));
    return s;
  }

  int max_abs_index() const {
    int r = 0;
    for (const auto& kv : coeffs) r = std::max({r, std::abs(kv.first.m1), std::abs(kv.first.m2)});
    return r;
  }
};

// V(y) = V0 [cos(k1.y) + cos(k2.y) + cos((k1 + k2).y)].
inline FourierPotential standard_honeycomb_potential(const LatticeGeometry& g, double V0) {
  FourierPotential V;
  V.geom = g;
  V.V0 = V0;
  if (V0 == 0.0) {
    V.warnings.push_back("degenerate potential: V0 = 0 gives the free Laplacian");
    return V;
  }
  for (DualIndex m : {DualIndex{1, 0}, DualIndex{0, 1}, DualIndex{1, 1}}) {
    V.coeffs[m] = V0 / 2.0;
    V.coeffs[-m] = V0 / 2.0;
  }
  return V;
}

inline FourierPotential potential_from_triples(const LatticeGeometry& g, const std::vector<std::pair<DualIndex, cplx>>& t) {
  FourierPotential V;
  V.geom = g;
  for (const auto& [m, c] : t) V.coeffs[m] += c;
  return V;
}

struct SymmetryCheck {
  double max_violation = 0.0;
  bool pass = true;
};

struct SymmetryReport {
  SymmetryCheck reality;
  SymmetryCheck evenness;
  SymmetryCheck rotation;
  bool all_pass() const { return reality.pass && evenness.pass && rotation.pass; }
};

inline SymmetryReport validate_honeycomb_symmetry(const FourierPotential& V, double tol = 1e-12) {
  SymmetryReport r;
  for (const auto& [m, c] : V.coeffs) {
    const cplx cm = V.coeff(-m);
    r.reality.max_violation = std::max(r.reality.max_violation, std::abs(cm - std::conj(c)));
    r.evenness.max_violation = std::max(r.evenness.max_violation, std::abs(cm - c));
    const cplx cr = V.coeff(rotate_dual_index(m, Anchor::origin));
    r.rotation.max_violation = std::max(r.rotation.max_violation, std::abs(cr - c));
  }
  r.reality.pass = r.reality.max_violation <= tol;
  r.evenness.pass = r.evenness.max_violation <= tol;
  r.rotation.pass = r.rotation.max_violation <= tol;
  return r;
}

struct GridPotential {
  RealField values;
  double max_imag = 0.0;  // largest discarded imaginary part
};

// Samples V(x / scale) on a periodic grid by inverse transform of the series.
inline GridPotential evaluate_on_grid(const FourierPotential& V, const RectGrid& grid, double scale = 1.0) {
  require(scale > 0.0, ErrorCode::invalid_parameter, "scale must be positive");
  ComplexField spec(grid.nx, grid.ny);
  for (const auto& [m, c] : V.coeffs) {
    const auto [f1, f2] = grid.frequency_index(V.geom.dual_vector(m) / scale);
    require(std::abs(f1) < long(grid.nx + 1) / 2 && std::abs(f2) < long(grid.ny + 1) / 2,
            ErrorCode::non_commensurate_grid, "potential bandwidth exceeds the grid's Nyquist limit");
    spec(slot_of(f1, grid.nx), slot_of(f2, grid.ny)) += c;
  }
  ComplexField phys = fft_backward(spec);
  GridPotential out;
  out.values = RealField(grid.nx, grid.ny);
  for (std::size_t k = 0; k < phys.size(); ++k) {
    out.values[k] = phys[k].real();
    out.max_imag = std::max(out.max_imag, std::abs(phys[k].imag()));
  }
  return out;
}

// Inverse of evaluate_on_grid: reads Vhat(m) for every m whose frequency is
// resolved on the grid and whose magnitude exceeds drop.
inline std::map<DualIndex, cplx> recover_coefficients(const LatticeGeometry& g, const RealField& values,
                                                      const RectGrid& grid, int reach, double drop = 1e-14) {
  ComplexField phys(values.nx(), values.ny());
  for (std::size_t k = 0; k < values.size(); ++k) phys[k] = values[k];
  ComplexField spec = fft_forward(phys);
  std::map<DualIndex, cplx> out;
  for (int m1 = -reach; m1 <= reach; ++m1)
    for (int m2 = -reach; m2 <= reach; ++m2) {
      const DualIndex m{m1, m2};
      const auto [f1, f2] = grid.frequency_index(g.dual_vector(m));
      if (std::abs(f1) >= long(grid.nx + 1) / 2 || std::abs(f2) >= long(grid.ny + 1) / 2) continue;
      const cplx c = spec(slot_of(f1, grid.nx), slot_of(f2, grid.ny));
      if (std::abs(c) > drop) out[m] = c;
    }
  return out;
}

// Grid over cellsX x cellsY rectangular supercells (a sqrt3, a) at unit scale.
inline RectGrid supercell_grid(const LatticeGeometry& g, int cellsX, int cellsY, int ppcX, int ppcY) {
  require(cellsX >= 1 && cellsY >= 1 && ppcX >= 2 && ppcY >= 2, ErrorCode::invalid_parameter,
          "supercell grid needs positive cell counts and >= 2 points per cell");
  RectGrid r;
  r.L1 = double(cellsX) * g.a * std::sqrt(3.0);
  r.L2 = double(cellsY) * g.a;
  r.nx = std::size_t(cellsX * ppcX);
  r.ny = std::size_t(cellsY * ppcY);
  return r;
}

}  // namespace honeydirac
