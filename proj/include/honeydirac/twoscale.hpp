#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <vector>

#include "honeydirac/error.hpp"
#include "honeydirac/fft.hpp"
#include "honeydirac/grid.hpp"
#include "honeydirac/lattice.hpp"

namespace honeydirac {

// A K-pseudo-periodic cell function P(y) = sum_m p(m) exp(i (K + k_m) . y).
struct CellProfile {
  std::shared_ptr<const PlaneWaveBasis> basis;
  Eigen::VectorXcd coeffs;
  Anchor anchor = Anchor::K;
};

struct PlacementStats {
  double dropped = 0.0;  // L2^2 weight of modes beyond the fine grid's Nyquist band
};

// Adds factor * e(x) P(x / eps) to the fine spectrum, where e is given by its
// Fourier coefficients on a coarse grid over the same box. Products of a coarse
// mode with a plane wave land exactly on fine frequencies because the box is
// commensurate.
inline void place_two_scale(const ComplexField& envelope_spec, const RectGrid& coarse, const CellProfile& prof,
                            const CommensurateGrid& fine, ComplexField& fine_spec, cplx factor = 1.0,
                            PlacementStats* stats = nullptr, double coeff_floor = 1e-17) {
  require(std::abs(coarse.L1 - fine.L1) <= 1e-10 * fine.L1 && std::abs(coarse.L2 - fine.L2) <= 1e-10 * fine.L2,
          ErrorCode::non_commensurate_grid, "envelope grid and fine grid must share the box");
  require(fine_spec.nx() == fine.nx && fine_spec.ny() == fine.ny, ErrorCode::invalid_parameter,
          "fine spectrum has the wrong shape");
  const auto [K1, K2] = fine.K_shift(prof.anchor);
  const long hx = long(fine.nx) / 2, hy = long(fine.ny) / 2;
  auto in_band = [](long f, long h, std::size_t n) { return n % 2 == 0 ? (f >= -h && f < h) : (f >= -h && f <= h); };

  // Envelope modes in signed form, skipping the coarse Nyquist slots.
  struct Mode {
    long a, b;
    cplx v;
  };
  std::vector<Mode> modes;
  double emax = 0.0;
  for (const auto& v : envelope_spec) emax = std::max(emax, std::abs(v));
  if (emax == 0.0) return;
  for (std::size_t i = 0; i < coarse.nx; ++i) {
    if (is_nyquist(i, coarse.nx)) continue;
    for (std::size_t j = 0; j < coarse.ny; ++j) {
      if (is_nyquist(j, coarse.ny)) continue;
      const cplx v = envelope_spec(i, j);
      if (std::abs(v) <= 1e-18 * emax) continue;
      modes.push_back({signed_index(i, coarse.nx), signed_index(j, coarse.ny), v * factor});
    }
  }
  const double cmax = prof.coeffs.cwiseAbs().maxCoeff();
  for (std::size_t p = 0; p < prof.basis->size(); ++p) {
    const cplx c = prof.coeffs(long(p));
    if (std::abs(c) <= coeff_floor * cmax) continue;
    const auto [s1, s2] = fine.dual_index_shift((*prof.basis)[p]);
    for (const auto& md : modes) {
      const long f1 = md.a + s1 + K1, f2 = md.b + s2 + K2;
      if (!in_band(f1, hx, fine.nx) || !in_band(f2, hy, fine.ny)) {
        if (stats) stats->dropped += std::norm(c * md.v) * fine.area();
        continue;
      }
      fine_spec(slot_of(f1, fine.nx), slot_of(f2, fine.ny)) += c * md.v;
    }
  }
}

// Spectrum of the constant envelope 1 on a 1 x 1 coarse grid over the box.
inline ComplexField unit_envelope_spectrum() { return ComplexField(1, 1, cplx(1.0)); }

}  // namespace honeydirac
