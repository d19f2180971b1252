#pragma once

#include <array>
#include <cmath>
#include <sstream>
#include <vector>

#include "honeydirac/bloch.hpp"
#include "honeydirac/error.hpp"
#include "honeydirac/fft.hpp"
#include "honeydirac/field.hpp"
#include "honeydirac/twoscale.hpp"

namespace honeydirac {

// Periodic part chi(theta) of a K-pseudo-periodic profile on the unit torus,
// y = theta1 v1 + theta2 v2, so that k_m . y = 2 pi m . theta.
inline ComplexField periodic_part_on_torus(const PlaneWaveBasis& basis, const Eigen::VectorXcd& c, std::size_t N) {
  ComplexField spec(N, N);
  for (std::size_t p = 0; p < basis.size(); ++p) {
    const auto& m = basis[p];
    require(2 * std::abs(m.m1) < long(N) && 2 * std::abs(m.m2) < long(N), ErrorCode::resolution_error,
            "torus grid too coarse for the plane-wave basis");
    spec(slot_of(m.m1, N), slot_of(m.m2, N)) += c(long(p));
  }
  return fft_backward(spec);
}

// Inverse of periodic_part_on_torus restricted to basis members.
inline Eigen::VectorXcd torus_to_coefficients(const ComplexField& f, const PlaneWaveBasis& basis) {
  const std::size_t N = f.nx();
  const ComplexField spec = fft_forward(f);
  Eigen::VectorXcd c(long(basis.size()));
  for (std::size_t p = 0; p < basis.size(); ++p) c(long(p)) = spec(slot_of(basis[p].m1, N), slot_of(basis[p].m2, N));
  return c;
}

// Torus points per axis: oversample times the single-profile bandwidth 2R+1.
// Cell averages of quartic products are alias-free once N > 4R (oversample >= 2).
inline std::size_t torus_size(int reach, int oversample) {
  require(oversample >= 1, ErrorCode::invalid_parameter, "oversample must be >= 1");
  return fft_friendly(std::size_t(oversample) * std::size_t(2 * reach + 1));
}

struct EffectiveCoefficients {
  std::array<cplx, 16> tensor{};  // <Phi_m, Phi_j conj(Phi_k) Phi_l>, indices 0 -> Phi1, 1 -> Phi2
  double b1 = 0.0, b2 = 0.0;
  int oversample = 0;
  std::size_t grid = 0;
  double forbidden_max = 0.0;  // largest |entry| with charge mismatch
  double equality_max = 0.0;   // largest relative deviation among the printed equalities
  double refinement_change = -1.0;

  static std::size_t idx(int j, int k, int l, int m) { return std::size_t(((j * 2 + k) * 2 + l) * 2 + m); }
  cplx operator()(int j, int k, int l, int m) const { return tensor[idx(j, k, l, m)]; }
  // Entries survive only when tau_j conj(tau_k) tau_l conj(tau_m) = 1.
  static bool allowed(int j, int k, int l, int m) {
    auto e = [](int i) { return i == 0 ? 1 : -1; };
    return e(j) - e(k) + e(l) - e(m) == 0;
  }
};

inline EffectiveCoefficients coupling_tensor_once(const DiracPointData& dp, int oversample) {
  const std::size_t N = torus_size(dp.basis->max_abs_index(), oversample);
  const ComplexField chi[2] = {periodic_part_on_torus(*dp.basis, dp.phi1, N),
                               periodic_part_on_torus(*dp.basis, dp.phi2, N)};
  EffectiveCoefficients ec;
  ec.oversample = oversample;
  ec.grid = N;
  const double w = 1.0 / double(N * N);
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l)
        for (int m = 0; m < 2; ++m) {
          cplx s = 0.0;
          for (std::size_t p = 0; p < N * N; ++p)
            s += std::conj(chi[m][p]) * chi[j][p] * std::conj(chi[k][p]) * chi[l][p];
          ec.tensor[EffectiveCoefficients::idx(j, k, l, m)] = s * w;
        }
  ec.b1 = ec(0, 0, 0, 0).real();
  ec.b2 = ec(0, 0, 1, 1).real();
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l)
        for (int m = 0; m < 2; ++m)
          if (!EffectiveCoefficients::allowed(j, k, l, m))
            ec.forbidden_max = std::max(ec.forbidden_max, std::abs(ec(j, k, l, m)));
  auto rel = [](cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
  ec.equality_max = std::max({rel(ec(1, 1, 1, 1), ec(0, 0, 0, 0)), rel(ec(0, 1, 1, 0), ec(0, 0, 1, 1)),
                              rel(ec(1, 1, 0, 0), ec(0, 0, 1, 1)), rel(ec(1, 0, 0, 1), ec(0, 0, 1, 1))});
  return ec;
}

// Cell averages of quartic products on an oversampled torus, checked against a
// run with doubled oversampling.
inline EffectiveCoefficients coupling_tensor(const DiracPointData& dp, int oversample = 4, double refine_tol = 1e-8) {
  EffectiveCoefficients ec = coupling_tensor_once(dp, oversample);
  const EffectiveCoefficients fine = coupling_tensor_once(dp, 2 * oversample);
  double change = 0.0;
  for (std::size_t i = 0; i < 16; ++i) change = std::max(change, std::abs(ec.tensor[i] - fine.tensor[i]));
  ec.refinement_change = change / ec.b1;
  if (ec.refinement_change > refine_tol) {
    std::ostringstream os;
    os << "coupling tensor changed by " << ec.refinement_change << " (relative) under oversample doubling";
    fail(ErrorCode::resolution_error, os.str());
  }
  return ec;
}

struct ParsevalReport {
  double sum_abs2 = 0.0;
  cplx sum_sq = 0.0;
  cplx sum_conj_sq = 0.0;
};

inline ParsevalReport parseval_identities(const DiracPointData& dp) {
  ParsevalReport r;
  for (long p = 0; p < dp.phi1.size(); ++p) {
    const cplx c = dp.phi1(p);
    r.sum_abs2 += std::norm(c);
    r.sum_sq += c * c;
    r.sum_conj_sq += std::conj(c) * std::conj(c);
  }
  return r;
}

// 2 pi / |xi| on the periodic box, zero mode set to 0.
inline ComplexField coulomb_convolve(const ComplexField& rho, const RectGrid& g) {
  return apply_multiplier(rho, g, [](double x1, double x2, std::size_t, std::size_t) {
    const double k = std::hypot(x1, x2);
    return k == 0.0 ? cplx(0.0) : cplx(2.0 * std::numbers::pi / k);
  });
}

struct HartreeFields {
  RealField total;  // V^eps
  RealField diag;   // from |alpha1 Phi1|^2 + |alpha2 Phi2|^2
  RealField cross;  // V_2^eps, from 2 Re(alpha1 Phi1 conj(alpha2 Phi2))
  double max_imag = 0.0;
};

namespace detail {
inline RealField real_part(const ComplexField& f, double& max_imag) {
  RealField r(f.nx(), f.ny());
  for (std::size_t k = 0; k < f.size(); ++k) {
    r[k] = f[k].real();
    max_imag = std::max(max_imag, std::abs(f[k].imag()));
  }
  return r;
}
}  // namespace detail

// V^eps = (1/|.|) * |sum_j alpha_j Phi_j(./eps)|^2 on the commensurate grid.
inline HartreeFields hartree_epsilon_potential(const SpinorField& alpha, const DiracPointData& dp,
                                               const CommensurateGrid& fine) {
  ComplexField u[2];
  for (int c = 0; c < 2; ++c) {
    ComplexField spec(fine.nx, fine.ny);
    place_two_scale(fft_forward(alpha[c]), alpha.grid, {dp.basis, c == 0 ? dp.phi1 : dp.phi2, dp.anchor}, fine, spec);
    u[c] = fft_backward(spec);
  }
  ComplexField rd(fine.nx, fine.ny), rc(fine.nx, fine.ny);
  for (std::size_t k = 0; k < rd.size(); ++k) {
    rd[k] = std::norm(u[0][k]) + std::norm(u[1][k]);
    rc[k] = 2.0 * (u[0][k] * std::conj(u[1][k])).real();
  }
  HartreeFields h;
  const ComplexField vd = coulomb_convolve(rd, fine), vc = coulomb_convolve(rc, fine);
  h.diag = detail::real_part(vd, h.max_imag);
  h.cross = detail::real_part(vc, h.max_imag);
  h.total = RealField(fine.nx, fine.ny);
  for (std::size_t k = 0; k < h.total.size(); ++k) h.total[k] = h.diag[k] + h.cross[k];
  return h;
}

// (1/|.|) * (|alpha1|^2 + |alpha2|^2) on the envelope grid.
inline RealField hartree_limit(const SpinorField& alpha) {
  ComplexField rho(alpha.grid.nx, alpha.grid.ny);
  for (std::size_t k = 0; k < rho.size(); ++k) rho[k] = std::norm(alpha.alpha1[k]) + std::norm(alpha.alpha2[k]);
  double mi = 0.0;
  return detail::real_part(coulomb_convolve(rho, alpha.grid), mi);
}

struct HartreeRow {
  double eps = 0.0;
  double total_deviation = 0.0;  // sup |V^eps - V_limit|
  double diag_deviation = 0.0;   // sup |V_1^eps - V_limit|
  double cross_sup = 0.0;        // sup |V_2^eps|
  double limit_sup = 0.0;        // sup |V_limit|
};

struct HartreeGridRule {
  int ppcX = 12, ppcY = 8;
};

inline std::vector<HartreeRow> hartree_limit_check(const SpinorField& alpha, const DiracPointData& dp,
                                                   const LatticeGeometry& g, const std::vector<double>& ladder,
                                                   int cellsX0, int cellsY0, HartreeGridRule rule = {}) {
  require(!ladder.empty(), ErrorCode::invalid_parameter, "empty eps ladder");
  for (std::size_t i = 1; i < ladder.size(); ++i)
    require(ladder[i] < ladder[i - 1], ErrorCode::invalid_parameter, "eps ladder must be strictly decreasing");
  std::vector<HartreeRow> rows;
  for (double eps : ladder) {
    const double ratio = ladder.front() / eps;
    const int cx = int(std::lround(cellsX0 * ratio)), cy = int(std::lround(cellsY0 * ratio));
    require(std::abs(cx - cellsX0 * ratio) < 1e-9 && std::abs(cy - cellsY0 * ratio) < 1e-9,
            ErrorCode::non_commensurate_grid, "eps ladder must scale the cell counts by integers");
    const CommensurateGrid fine = build_commensurate_grid(g, eps, cx, cy, rule.ppcX, rule.ppcY);
    const HartreeFields h = hartree_epsilon_potential(alpha, dp, fine);
    ComplexField lim_c(alpha.grid.nx, alpha.grid.ny);
    const RealField lim = hartree_limit(alpha);
    for (std::size_t k = 0; k < lim.size(); ++k) lim_c[k] = lim[k];
    const ComplexField lim_f = spectral_resample(lim_c, alpha.grid, fine);
    HartreeRow r;
    r.eps = eps;
    for (std::size_t k = 0; k < h.total.size(); ++k) {
      const double L = lim_f[k].real();
      r.total_deviation = std::max(r.total_deviation, std::abs(h.total[k] - L));
      r.diag_deviation = std::max(r.diag_deviation, std::abs(h.diag[k] - L));
      r.cross_sup = std::max(r.cross_sup, std::abs(h.cross[k]));
      r.limit_sup = std::max(r.limit_sup, std::abs(L));
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace honeydirac
