#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <vector>

#include "honeydirac/bloch.hpp"
#include "honeydirac/dirac2d.hpp"
#include "honeydirac/effcoef.hpp"
#include "honeydirac/error.hpp"
#include "honeydirac/fft.hpp"
#include "honeydirac/field.hpp"
#include "honeydirac/twoscale.hpp"

namespace honeydirac {

// L0^{-1} = (1 - P*)(mu* - H)^{-1}(1 - P*) at K*, from a full eigendecomposition
// of H in a disc basis that may be larger than the one Phi1, Phi2 were found in.
struct PartialResolvent {
  std::shared_ptr<const PlaneWaveBasis> basis;
  Eigen::MatrixXd vectors;
  Eigen::VectorXd weights;  // 1 / (mu* - mu_n), zero on the Dirac pair
  Eigen::VectorXd eigenvalues;
  double mustar = 0.0;
  double margin = 0.0;  // min |mu* - mu_n| over n outside the pair
  int pair = 0;
  Eigen::VectorXcd phi[2];  // Phi1, Phi2 embedded in this basis

  Eigen::VectorXcd apply(const Eigen::VectorXcd& f) const {
    const Eigen::VectorXcd a = vectors.transpose() * f;
    return vectors * (weights.asDiagonal() * a);
  }

  // (mu* - H) f in this basis.
  Eigen::VectorXcd shifted_hamiltonian(const Eigen::VectorXcd& f) const {
    const Eigen::VectorXcd a = vectors.transpose() * f;
    return vectors * ((mustar - eigenvalues.array()).matrix().asDiagonal() * a);
  }

  Eigen::VectorXcd project_out(const Eigen::VectorXcd& f) const {
    Eigen::VectorXcd g = f;
    for (const auto& p : phi) g -= p * p.dot(f);
    return g;
  }
};

// Coefficients of f (over `from`) re-indexed onto `to`; indices missing in `to` must be zero.
inline Eigen::VectorXcd embed_coefficients(const Eigen::VectorXcd& f, const PlaneWaveBasis& from, const PlaneWaveBasis& to,
                                           double* lost = nullptr) {
  Eigen::VectorXcd g = Eigen::VectorXcd::Zero(long(to.size()));
  double l = 0.0;
  for (std::size_t p = 0; p < from.size(); ++p) {
    const long q = to.position(from[p]);
    if (q >= 0)
      g(q) = f(long(p));
    else
      l += std::norm(f(long(p)));
  }
  if (lost) *lost = std::sqrt(l);
  return g;
}

inline PartialResolvent build_partial_resolvent(const FourierPotential& V, const DiracPointData& dp, int M,
                                                double min_margin = 1e-6) {
  require(M >= int(dp.M), ErrorCode::invalid_parameter, "resolvent cutoff must not be below the Dirac point cutoff");
  const LatticeGeometry& g = V.geom;
  PartialResolvent r;
  r.basis = M == int(dp.M) ? dp.basis : std::make_shared<const PlaneWaveBasis>(PlaneWaveBasis::disc(g, dp.Kstar, M));
  r.mustar = dp.mustar;
  if (M == int(dp.M) && dp.spectrum) {
    r.vectors = dp.spectrum->eigenvectors;
    r.eigenvalues = dp.spectrum->eigenvalues;
  } else {
    const BlochSolution s = solve_bloch(assemble_bloch_hamiltonian(V, dp.Kstar, *r.basis), int(r.basis->size()), true);
    r.vectors = s.eigenvectors;
    r.eigenvalues = s.eigenvalues;
  }
  for (int j = 0; j < 2; ++j) r.phi[j] = embed_coefficients(j == 0 ? dp.phi1 : dp.phi2, *dp.basis, *r.basis);

  // The pair is the adjacent couple closest to mu*.
  const long n = r.eigenvalues.size();
  long best = 0;
  for (long b = 0; b + 1 < n; ++b)
    if (std::abs(r.eigenvalues(b) + r.eigenvalues(b + 1) - 2 * dp.mustar) <
        std::abs(r.eigenvalues(best) + r.eigenvalues(best + 1) - 2 * dp.mustar))
      best = b;
  r.pair = int(best);
  require(std::abs(r.eigenvalues(best) - dp.mustar) <= 1e-8 * (1 + std::abs(dp.mustar)) &&
              std::abs(r.eigenvalues(best + 1) - dp.mustar) <= 1e-8 * (1 + std::abs(dp.mustar)),
          ErrorCode::resolution_error, "Dirac pair not reproduced in the resolvent basis");
  r.weights.resize(n);
  r.margin = std::numeric_limits<double>::infinity();
  long worst = -1;
  for (long k = 0; k < n; ++k) {
    if (k == best || k == best + 1) {
      r.weights(k) = 0.0;
      continue;
    }
    const double d = dp.mustar - r.eigenvalues(k);
    if (std::abs(d) < r.margin) {
      r.margin = std::abs(d);
      worst = k;
    }
    r.weights(k) = 1.0 / d;
  }
  if (r.margin < min_margin) {
    std::ostringstream os;
    os << "eigenvalue " << r.eigenvalues(worst) << " lies within " << r.margin << " of mu* = " << dp.mustar;
    fail(ErrorCode::ill_conditioned_resolvent, os.str());
  }
  return r;
}

// Twelve cell profiles: p = 2j + l for d_{y_l} Phi_j, p = 4 + 4j + 2k + l for
// Phi_j conj(Phi_k) Phi_l; indices 0 -> Phi1, 1 -> Phi2.
struct ProfileBasis {
  static constexpr int count = 12;
  static int derivative_index(int j, int l) { return 2 * j + l; }
  static int triple_index(int j, int k, int l) { return 4 + 4 * j + 2 * k + l; }

  PartialResolvent resolvent;
  std::array<Eigen::VectorXcd, count> profiles;  // over resolvent.basis
  std::array<Eigen::VectorXcd, count> resolved;  // L0^{-1} applied
  double truncated = 0.0;                        // L2 weight of cubic products beyond the basis
  double orthogonality = 0.0;                    // max |<Phi_n, L0^{-1} P_p>|
  std::size_t torus = 0;

  // Overlap tensors with Phi_n:
  //   G(n, p, l) = <Phi_n, d_{y_l} R_p>
  //   A(n, k, l, p) = <Phi_n, conj(Phi_k) Phi_l R_p>
  //   B(n, j, l, p) = <Phi_n, Phi_j Phi_l conj(R_p)>
  std::array<cplx, 2 * count * 2> G{};
  std::array<cplx, 2 * 2 * 2 * count> A{};
  std::array<cplx, 2 * 2 * 2 * count> B{};
  // <Phi_n, d_{y_l} Phi_j> and <Phi_n, Phi_j conj(Phi_k) Phi_l>, for the solvability check.
  std::array<cplx, 8> D{};
  std::array<cplx, 16> T{};

  cplx g(int n, int p, int l) const { return G[std::size_t((n * count + p) * 2 + l)]; }
  cplx a(int n, int k, int l, int p) const { return A[std::size_t(((n * 2 + k) * 2 + l) * count + p)]; }
  cplx b(int n, int j, int l, int p) const { return B[std::size_t(((n * 2 + j) * 2 + l) * count + p)]; }
  cplx d(int n, int j, int l) const { return D[std::size_t((n * 2 + j) * 2 + l)]; }
  cplx t(int n, int j, int k, int l) const { return T[std::size_t(((n * 2 + j) * 2 + k) * 2 + l)]; }
};

// Gradient coefficients i (K* + k_m)_l f(m).
inline Eigen::VectorXcd cell_derivative(const Eigen::VectorXcd& f, const PlaneWaveBasis& basis, const LatticeGeometry& g,
                                        const Vec2& K, int l) {
  Eigen::VectorXcd d(f.size());
  for (std::size_t p = 0; p < basis.size(); ++p)
    d(long(p)) = cplx(0.0, g.shifted_vector(basis[p], K)(l)) * f(long(p));
  return d;
}

inline ProfileBasis build_profile_basis(const FourierPotential& V, const DiracPointData& dp, int M = -1,
                                        int oversample = 3) {
  const LatticeGeometry& g = V.geom;
  ProfileBasis pb;
  pb.resolvent = build_partial_resolvent(V, dp, M < 0 ? int(dp.M) : M);
  const PartialResolvent& R = pb.resolvent;
  const PlaneWaveBasis& basis = *R.basis;
  const Vec2& K = dp.Kstar;

  for (int j = 0; j < 2; ++j)
    for (int l = 0; l < 2; ++l)
      pb.profiles[std::size_t(ProfileBasis::derivative_index(j, l))] = cell_derivative(R.phi[j], basis, g, K, l);

  // Cubic products of periodic parts on a torus wide enough that aliases of the
  // triple product stay outside the basis.
  const int reach = basis.max_abs_index();
  const std::size_t N = fft_friendly(std::size_t(oversample) * std::size_t(2 * reach + 1));
  pb.torus = N;
  const ComplexField chi[2] = {periodic_part_on_torus(basis, R.phi[0], N), periodic_part_on_torus(basis, R.phi[1], N)};
  double trunc = 0.0;
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l) {
        ComplexField prod(N, N);
        for (std::size_t q = 0; q < N * N; ++q) prod[q] = chi[j][q] * std::conj(chi[k][q]) * chi[l][q];
        const ComplexField spec = fft_forward(prod);
        double total = 0.0;
        for (const auto& v : spec) total += std::norm(v);
        Eigen::VectorXcd c = torus_to_coefficients(prod, basis);
        trunc = std::max(trunc, std::sqrt(std::max(0.0, total - c.squaredNorm())));
        pb.profiles[std::size_t(ProfileBasis::triple_index(j, k, l))] = c;
      }
  pb.truncated = trunc;

  for (int p = 0; p < ProfileBasis::count; ++p) {
    pb.resolved[std::size_t(p)] = R.apply(pb.profiles[std::size_t(p)]);
    for (const auto& ph : R.phi) pb.orthogonality = std::max(pb.orthogonality, std::abs(ph.dot(pb.resolved[std::size_t(p)])));
  }

  // Overlaps.
  std::array<ComplexField, ProfileBasis::count> rho;
  for (int p = 0; p < ProfileBasis::count; ++p) rho[std::size_t(p)] = periodic_part_on_torus(basis, pb.resolved[std::size_t(p)], N);
  const double w = 1.0 / double(N * N);
  for (int n = 0; n < 2; ++n) {
    for (int p = 0; p < ProfileBasis::count; ++p)
      for (int l = 0; l < 2; ++l)
        pb.G[std::size_t((n * ProfileBasis::count + p) * 2 + l)] =
            R.phi[n].dot(cell_derivative(pb.resolved[std::size_t(p)], basis, g, K, l));
    for (int j = 0; j < 2; ++j)
      for (int l = 0; l < 2; ++l) {
        pb.D[std::size_t((n * 2 + j) * 2 + l)] = R.phi[n].dot(cell_derivative(R.phi[j], basis, g, K, l));
        for (int p = 0; p < ProfileBasis::count; ++p) {
          cplx sa = 0.0, sb = 0.0;
          const ComplexField& r = rho[std::size_t(p)];
          for (std::size_t q = 0; q < N * N; ++q) {
            const cplx cn = std::conj(chi[n][q]);
            sa += cn * std::conj(chi[j][q]) * chi[l][q] * r[q];
            sb += cn * chi[j][q] * chi[l][q] * std::conj(r[q]);
          }
          // A uses (k, l) = (j, l); B uses (j, l).
          pb.A[std::size_t(((n * 2 + j) * 2 + l) * ProfileBasis::count + p)] = sa * w;
          pb.B[std::size_t(((n * 2 + j) * 2 + l) * ProfileBasis::count + p)] = sb * w;
        }
      }
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          pb.T[std::size_t(((n * 2 + j) * 2 + k) * 2 + l)] =
              R.phi[n].dot(pb.profiles[std::size_t(ProfileBasis::triple_index(j, k, l))]);
  }
  return pb;
}

// u1perp(t, x, y) = sum_p c_p(t, x) R_p(y) with R_p = L0^{-1} P_p, c_p = -f_p and
// f = {2 d_{x_l} alpha_j} U {-kappa alpha_j conj(alpha_k) alpha_l}.
struct CorrectorData {
  RectGrid grid;
  double t = 0.0;
  std::array<ComplexField, ProfileBasis::count> c;
  double fredholm_residual = -1.0;  // set when d_t alpha was supplied
};

// <Phi_n, L1 u0 - kappa |u0|^2 u0> evaluated from the cell overlaps; zero when alpha
// solves the nonlinear Dirac system.
inline SpinorField fredholm_residual(const SpinorField& alpha, const SpinorField& dalpha_dt, const ProfileBasis& pb,
                                     double kappa) {
  const RectGrid& gr = alpha.grid;
  ComplexField dx[2][2];
  for (int j = 0; j < 2; ++j)
    for (int l = 0; l < 2; ++l) dx[j][l] = spectral_derivative(alpha[j], gr, l);
  SpinorField r(gr, alpha.t);
  const cplx I(0.0, 1.0);
  for (std::size_t q = 0; q < alpha.alpha1.size(); ++q) {
    const cplx a[2] = {alpha.alpha1[q], alpha.alpha2[q]};
    for (int n = 0; n < 2; ++n) {
      cplx s = I * dalpha_dt[n][q];
      for (int j = 0; j < 2; ++j)
        for (int l = 0; l < 2; ++l) s += 2.0 * pb.d(n, j, l) * dx[j][l][q];
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l) s -= kappa * pb.t(n, j, k, l) * a[j] * std::conj(a[k]) * a[l];
      r[n][q] = s;
    }
  }
  return r;
}

inline CorrectorData build_u1_perp(const SpinorField& alpha, const ProfileBasis& pb, double kappa,
                                   const SpinorField* dalpha_dt = nullptr, double fredholm_tol = 1e-9) {
  const RectGrid& gr = alpha.grid;
  CorrectorData cd;
  cd.grid = gr;
  cd.t = alpha.t;
  for (int j = 0; j < 2; ++j)
    for (int l = 0; l < 2; ++l) {
      ComplexField d = spectral_derivative(alpha[j], gr, l);
      d *= cplx(-2.0);
      cd.c[std::size_t(ProfileBasis::derivative_index(j, l))] = std::move(d);
    }
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l) {
        ComplexField f(gr.nx, gr.ny);
        for (std::size_t q = 0; q < f.size(); ++q) f[q] = kappa * alpha[j][q] * std::conj(alpha[k][q]) * alpha[l][q];
        cd.c[std::size_t(ProfileBasis::triple_index(j, k, l))] = std::move(f);
      }
  if (dalpha_dt) {
    const SpinorField r = fredholm_residual(alpha, *dalpha_dt, pb, kappa);
    double scale = 0.0, worst = 0.0;
    for (int n = 0; n < 2; ++n) {
      scale = std::max(scale, dalpha_dt->sup(n));
      worst = std::max(worst, r.sup(n));
    }
    cd.fredholm_residual = worst / std::max(scale, 1e-300);
    if (cd.fredholm_residual > fredholm_tol) {
      std::ostringstream os;
      os << "solvability residual " << cd.fredholm_residual << " exceeds " << fredholm_tol;
      fail(ErrorCode::alpha_not_a_solution, os.str());
    }
  }
  return cd;
}

// u1perp at one macroscopic point as coefficients over the resolvent basis.
inline Eigen::VectorXcd u1_perp_profile_at(const CorrectorData& cd, const ProfileBasis& pb, std::size_t i, std::size_t j) {
  Eigen::VectorXcd u = Eigen::VectorXcd::Zero(long(pb.resolvent.basis->size()));
  for (int p = 0; p < ProfileBasis::count; ++p) u += cd.c[std::size_t(p)](i, j) * pb.resolved[std::size_t(p)];
  return u;
}

// Theta_n = Delta alpha_n + <Phi_n, L1 u1perp> - kappa <Phi_n, (u0 conj(u1perp) + 2 conj(u0) u1perp) u0>.
// <Phi_n, i d_t u1perp> vanishes because u1perp is orthogonal to Phi_n for all t.
inline SpinorField build_theta_sources(const SpinorField& alpha, const CorrectorData& cd, const ProfileBasis& pb,
                                       double kappa) {
  const RectGrid& gr = alpha.grid;
  SpinorField th(gr, alpha.t);
  for (int n = 0; n < 2; ++n) th[n] = spectral_laplacian(alpha[n], gr);
  for (int p = 0; p < ProfileBasis::count; ++p)
    for (int l = 0; l < 2; ++l) {
      const cplx g0 = pb.g(0, p, l), g1 = pb.g(1, p, l);
      if (g0 == 0.0 && g1 == 0.0) continue;
      const ComplexField d = spectral_derivative(cd.c[std::size_t(p)], gr, l);
      for (std::size_t q = 0; q < d.size(); ++q) {
        th.alpha1[q] += 2.0 * g0 * d[q];
        th.alpha2[q] += 2.0 * g1 * d[q];
      }
    }
  if (kappa != 0.0) {
    for (std::size_t q = 0; q < th.alpha1.size(); ++q) {
      const cplx a[2] = {alpha.alpha1[q], alpha.alpha2[q]};
      for (int n = 0; n < 2; ++n) {
        cplx s = 0.0;
        for (int p = 0; p < ProfileBasis::count; ++p) {
          const cplx cp = cd.c[std::size_t(p)][q];
          if (cp == 0.0) continue;
          for (int k = 0; k < 2; ++k)
            for (int l = 0; l < 2; ++l)
              s += 2.0 * std::conj(a[k]) * a[l] * cp * pb.a(n, k, l, p) + a[k] * a[l] * std::conj(cp) * pb.b(n, k, l, p);
        }
        th[n][q] -= kappa * s;
      }
    }
  }
  return th;
}

enum class WkbOrder { zero, one };

// Psi_app(t, x) = exp(-i mu* t / eps) [sum_j (alpha_j + eps beta_j) Phi_j(x/eps) + eps u1perp(t, x, x/eps)];
// order zero keeps only the alpha terms. Returns the fine-grid spectrum.
inline ComplexField assemble_wkb_spectrum(const SpinorField& alpha, const SpinorField* beta, const CorrectorData* cd,
                                          const DiracPointData& dp, const ProfileBasis* pb, const CommensurateGrid& fine,
                                          WkbOrder order, PlacementStats* stats = nullptr) {
  const double eps = fine.eps;
  ComplexField spec(fine.nx, fine.ny);
  const bool first = order == WkbOrder::one;
  require(!first || (beta && cd && pb), ErrorCode::invalid_parameter, "first-order field needs beta and u1perp");
  for (int j = 0; j < 2; ++j) {
    ComplexField env = alpha[j];
    if (first)
      for (std::size_t q = 0; q < env.size(); ++q) env[q] += eps * (*beta)[j][q];
    const CellProfile prof{dp.basis, j == 0 ? dp.phi1 : dp.phi2, dp.anchor};
    place_two_scale(fft_forward(env), alpha.grid, prof, fine, spec, 1.0, stats);
  }
  if (first)
    for (int p = 0; p < ProfileBasis::count; ++p) {
      const CellProfile prof{pb->resolvent.basis, pb->resolved[std::size_t(p)], dp.anchor};
      place_two_scale(fft_forward(cd->c[std::size_t(p)]), alpha.grid, prof, fine, spec, eps, stats);
    }
  spec *= std::polar(1.0, -dp.mustar * alpha.t / eps);
  return spec;
}

inline ComplexField assemble_wkb_field(const SpinorField& alpha, const SpinorField* beta, const CorrectorData* cd,
                                       const DiracPointData& dp, const ProfileBasis* pb, const CommensurateGrid& fine,
                                       WkbOrder order, PlacementStats* stats = nullptr) {
  return fft_backward(assemble_wkb_spectrum(alpha, beta, cd, dp, pb, fine, order, stats));
}

}  // namespace honeydirac
