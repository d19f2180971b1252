#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "honeydirac/error.hpp"
#include "honeydirac/lattice.hpp"
#include "honeydirac/potential.hpp"

namespace honeydirac {

using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

// H_{m,m'} = |k + k_m|^2 delta_{m,m'} + Vhat(m - m'). Honeycomb potentials are
// real and even, so Vhat is real and H is real symmetric.
inline MatrixXd assemble_bloch_hamiltonian(const FourierPotential& V, const Vec2& k, const PlaneWaveBasis& basis) {
  for (const auto& [m, c] : V.coeffs)
    require(std::abs(c.imag()) <= 1e-14 * (1.0 + std::abs(c)), ErrorCode::invalid_parameter,
            "potential coefficients must be real (inversion-symmetric potential)");
  const std::size_t n = basis.size();
  MatrixXd H = MatrixXd::Zero(long(n), long(n));
  for (std::size_t p = 0; p < n; ++p) {
    const DualIndex& m = basis[p];
    H(long(p), long(p)) = V.geom.shifted_vector(m, k).squaredNorm();
    for (const auto& [d, c] : V.coeffs) {
      const long pp = basis.position(m - d);
      if (pp >= 0) H(long(p), pp) += c.real();
    }
  }
  return H;
}

inline MatrixXd assemble_bloch_hamiltonian(const FourierPotential& V, const Vec2& k, int M) {
  return assemble_bloch_hamiltonian(V, k, PlaneWaveBasis::box(M));
}

struct BlochSolution {
  Vec2 k = Vec2::Zero();
  std::shared_ptr<const PlaneWaveBasis> basis;
  VectorXd eigenvalues;   // ascending
  MatrixXd eigenvectors;  // one column of plane-wave coefficients per band
  double max_residual = 0.0;
};

inline BlochSolution solve_bloch(const MatrixXd& H, int nbands, bool vectors = true) {
  require(nbands >= 1 && nbands <= H.rows(), ErrorCode::invalid_parameter, "nbands must lie in [1, dim H]");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(H, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eigensolver did not converge (dim " << H.rows() << ", max |H_ij| " << H.cwiseAbs().maxCoeff() << ")";
    fail(ErrorCode::solver_failure, os.str());
  }
  BlochSolution s;
  s.eigenvalues = es.eigenvalues().head(nbands);
  if (vectors) {
    s.eigenvectors = es.eigenvectors().leftCols(nbands);
    for (int b = 0; b < nbands; ++b) {
      const double mu = s.eigenvalues(b);
      const double r = (H * s.eigenvectors.col(b) - mu * s.eigenvectors.col(b)).norm();
      s.max_residual = std::max(s.max_residual, r / (1.0 + std::abs(mu)));
    }
    if (s.max_residual > 1e-10) {
      std::ostringstream os;
      os << "eigenpair residual " << s.max_residual << " exceeds 1e-10 relative";
      fail(ErrorCode::solver_failure, os.str());
    }
  }
  return s;
}

inline BlochSolution solve_bloch_at(const FourierPotential& V, const Vec2& k, std::shared_ptr<const PlaneWaveBasis> basis,
                                    int nbands, bool vectors = true) {
  BlochSolution s = solve_bloch(assemble_bloch_hamiltonian(V, k, *basis), nbands, vectors);
  s.k = k;
  s.basis = std::move(basis);
  return s;
}

struct BandRow {
  Vec2 k;
  double arclength = 0.0;
  VectorXd mu;
};

inline std::vector<BandRow> band_structure(const FourierPotential& V, const std::vector<PathPoint>& path, int M,
                                           int nbands, BasisKind kind = BasisKind::disc) {
  std::vector<BandRow> rows;
  rows.reserve(path.size());
  for (const auto& p : path) {
    auto basis = std::make_shared<const PlaneWaveBasis>(make_basis(V.geom, p.k, M, kind));
    BlochSolution s = solve_bloch_at(V, p.k, basis, nbands, false);
    rows.push_back({p.k, p.arclength, s.eigenvalues});
  }
  return rows;
}

// Permutation implementing (P_R c)(rho(m)) = c(m); perm[p] is the position of rho(m_p).
inline std::vector<long> rotation_permutation(const PlaneWaveBasis& basis, Anchor anchor) {
  std::vector<long> perm(basis.size());
  for (std::size_t p = 0; p < basis.size(); ++p) {
    perm[p] = basis.position(rotate_dual_index(basis[p], anchor));
    require(perm[p] >= 0, ErrorCode::invalid_parameter, "plane-wave basis is not closed under the rotation");
  }
  return perm;
}

template <class Vec>
Vec apply_rotation(const std::vector<long>& perm, const Vec& c) {
  Vec out(c.size());
  for (std::size_t p = 0; p < perm.size(); ++p) out(perm[p]) = c(long(p));
  return out;
}

// max |(P H P^T - H)_{ij}|, i.e. the commutator [H, P_R] in max norm.
inline double rotation_commutator(const MatrixXd& H, const std::vector<long>& perm) {
  double m = 0.0;
  for (long i = 0; i < H.rows(); ++i)
    for (long j = 0; j < H.cols(); ++j) m = std::max(m, std::abs(H(perm[i], perm[j]) - H(i, j)));
  return m;
}

struct GaugeRecord {
  DualIndex index;     // coefficient made real positive
  double phase = 0.0;  // phase multiplied onto the raw eigenvector
};

struct DiracPointData {
  Anchor anchor = Anchor::K;
  Vec2 Kstar = Vec2::Zero();
  std::shared_ptr<const PlaneWaveBasis> basis;
  std::shared_ptr<const BlochSolution> spectrum;  // full eigendecomposition at Kstar
  double mustar = 0.0;
  VectorXcd phi1, phi2;
  cplx lambdaSharp = 0.0;
  double gap = 0.0;
  int bandPair = 0;  // first index of the pair (bandPair, bandPair + 1)
  cplx rotationEigs[2] = {0.0, 0.0};
  double commutator = 0.0;
  double invarianceResidual = 0.0;  // ||P E - E A|| for the pair subspace
  double rotationResidual = 0.0;    // max(|P phi1 - tau phi1|, |P phi2 - conj(tau) phi2|)
  double phi2RelationError = 0.0;   // independent tau-bar eigenvector vs conj(phi1)
  GaugeRecord gauge;
  double M = 0;
};

// Largest-magnitude coefficient made real positive; rotation orbits share
// magnitudes, so ties (within 1e-9 relative) go to the lexicographically
// smallest index.
inline GaugeRecord fix_gauge(VectorXcd& c, const PlaneWaveBasis& basis) {
  const double cmax = c.cwiseAbs().maxCoeff();
  long best = -1;
  for (long p = 0; p < c.size(); ++p) {
    if (std::abs(c(p)) < cmax * (1.0 - 1e-9)) continue;
    if (best < 0 || basis[std::size_t(p)] < basis[std::size_t(best)]) best = p;
  }
  const double ph = -std::arg(c(best));
  c *= std::polar(1.0, ph);
  c(best) = cplx(c(best).real(), 0.0);
  return {basis[std::size_t(best)], ph};
}

// <a, zeta . grad b> in the normalized cell inner product, for fields with
// coefficients over basis at quasimomentum k.
inline cplx grad_inner(const VectorXcd& a, const VectorXcd& b, const PlaneWaveBasis& basis, const LatticeGeometry& g,
                       const Vec2& k, const Vec2& zeta) {
  cplx s = 0.0;
  for (std::size_t p = 0; p < basis.size(); ++p) {
    const double kz = g.shifted_vector(basis[p], k).dot(zeta);
    s += std::conj(a(long(p))) * cplx(0.0, kz) * b(long(p));
  }
  return s;
}

struct LambdaReport {
  cplx lambda = 0.0;       // from zeta = (1, 0)
  cplx lambda_y = 0.0;     // from zeta = (0, 1)
  cplx fourier_sum = 0.0;  // sum over all m of c(m)^2 (1, i) . K*_m
  double relative_disagreement = 0.0;
  double fourier_disagreement = 0.0;
  double diagonal_max = 0.0;  // max_n max_l |<Phi_n, d_l Phi_n>|
  bool assumption_ok = false;
};

inline LambdaReport lambda_sharp_report(const LatticeGeometry& g, const Vec2& K, const PlaneWaveBasis& basis,
                                        const VectorXcd& phi1, const VectorXcd& phi2) {
  LambdaReport r;
  const Vec2 e1(1.0, 0.0), e2(0.0, 1.0);
  // 2i<Phi2, d1 Phi1> = -lambda and 2i<Phi2, d2 Phi1> = i lambda.
  r.lambda = cplx(0.0, -2.0) * grad_inner(phi2, phi1, basis, g, K, e1);
  r.lambda_y = 2.0 * grad_inner(phi2, phi1, basis, g, K, e2);
  for (std::size_t p = 0; p < basis.size(); ++p) {
    const Vec2 Km = g.shifted_vector(basis[p], K);
    const cplx c = phi1(long(p));
    r.fourier_sum += c * c * cplx(Km.x(), Km.y());
  }
  const double scale = std::max(std::abs(r.lambda), 1e-300);
  r.relative_disagreement = std::abs(r.lambda - r.lambda_y) / scale;
  r.fourier_disagreement = std::abs(r.lambda - r.fourier_sum) / scale;
  for (const VectorXcd* f : {&phi1, &phi2})
    for (const Vec2& z : {e1, e2}) r.diagonal_max = std::max(r.diagonal_max, std::abs(grad_inner(*f, *f, basis, g, K, z)));
  r.assumption_ok = std::abs(r.lambda) >= 1e-8;
  return r;
}

inline LambdaReport compute_lambda_sharp(const DiracPointData& dp, const LatticeGeometry& g) {
  LambdaReport r = lambda_sharp_report(g, dp.Kstar, *dp.basis, dp.phi1, dp.phi2);
  if (r.relative_disagreement > 1e-6) {
    std::ostringstream os;
    os << "lambda extractions disagree: " << r.lambda << " vs " << r.lambda_y;
    fail(ErrorCode::symmetry_classification_failure, os.str());
  }
  if (!r.assumption_ok) fail(ErrorCode::assumption_violated, "lambda_sharp vanishes: the cone is not conical");
  return r;
}

struct DiracOptions {
  int M = 12;
  double tolDegeneracy = 1e-6;
  int bandPair = -1;  // -1: lowest admissible pair
  int scanBands = 24;
  Anchor anchor = Anchor::K;
};

inline DiracPointData locate_dirac_point(const FourierPotential& V, const DiracOptions& opt = {}) {
  const SymmetryReport sym = validate_honeycomb_symmetry(V, 1e-12);
  require(sym.all_pass(), ErrorCode::invalid_parameter, "potential is not a honeycomb lattice potential");
  require(opt.anchor != Anchor::origin, ErrorCode::invalid_parameter, "Dirac points live at K or K'");
  const LatticeGeometry& g = V.geom;
  const Vec2 K = g.anchor_vector(opt.anchor);
  auto basis = std::make_shared<const PlaneWaveBasis>(PlaneWaveBasis::disc(g, K, opt.M));
  const MatrixXd H = assemble_bloch_hamiltonian(V, K, *basis);
  auto spec = std::make_shared<BlochSolution>(solve_bloch(H, int(H.rows()), true));
  spec->k = K;
  spec->basis = basis;
  const auto perm = rotation_permutation(*basis, opt.anchor);

  const cplx tau = g.tau;
  const cplx tau_target = opt.anchor == Anchor::K ? tau : std::conj(tau);
  bool saw_degenerate = false;
  std::string sector_note;
  const int last = std::min<int>(opt.scanBands, int(H.rows()) - 1);
  const int first = opt.bandPair >= 0 ? opt.bandPair : 0;
  const int stop = opt.bandPair >= 0 ? opt.bandPair + 1 : last;
  for (int b = first; b < stop; ++b) {
    const double mu0 = spec->eigenvalues(b), mu1 = spec->eigenvalues(b + 1);
    const double gap = mu1 - mu0;
    if (gap > opt.tolDegeneracy * (1.0 + std::abs(mu0))) continue;
    saw_degenerate = true;
    const MatrixXd E = spec->eigenvectors.middleCols(b, 2);
    MatrixXd PE(E.rows(), 2);
    for (int c = 0; c < 2; ++c) PE.col(c) = apply_rotation(perm, VectorXd(E.col(c)));
    const MatrixXd A = E.transpose() * PE;
    const double inv = (PE - E * A).norm();
    if (inv > 1e-8) {
      sector_note = "pair not invariant under R (part of a larger cluster)";
      continue;
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ces(A.cast<cplx>());
    const auto ev = ces.eigenvalues();
    int it = std::abs(ev(0) - tau_target) <= std::abs(ev(1) - tau_target) ? 0 : 1;
    const int itb = 1 - it;
    if (std::abs(ev(it) - tau_target) > 1e-8 || std::abs(ev(itb) - std::conj(tau_target)) > 1e-8) {
      std::ostringstream os;
      os << "R restricted to bands (" << b << "," << b + 1 << ") has eigenvalues " << ev(0) << ", " << ev(1);
      sector_note = os.str();
      if (opt.bandPair >= 0) fail(ErrorCode::wrong_symmetry_sector, sector_note);
      continue;
    }
    DiracPointData dp;
    dp.anchor = opt.anchor;
    dp.Kstar = K;
    dp.basis = basis;
    dp.mustar = 0.5 * (mu0 + mu1);
    dp.gap = gap;
    dp.bandPair = b;
    dp.M = opt.M;
    dp.commutator = rotation_commutator(H, perm);
    dp.invarianceResidual = inv;
    dp.rotationEigs[0] = ev(it);
    dp.rotationEigs[1] = ev(itb);
    VectorXcd phi1 = E.cast<cplx>() * ces.eigenvectors().col(it);
    VectorXcd phi2i = E.cast<cplx>() * ces.eigenvectors().col(itb);
    phi1.normalize();
    phi2i.normalize();
    dp.gauge = fix_gauge(phi1, *basis);
    dp.phi1 = phi1;
    dp.phi2 = phi1.conjugate();
    const cplx ov = phi2i.dot(dp.phi2);  // conj(phi2i) . phi2
    phi2i *= std::polar(1.0, std::arg(ov));
    dp.phi2RelationError = (phi2i - dp.phi2).cwiseAbs().maxCoeff();
    dp.rotationResidual = std::max((apply_rotation(perm, dp.phi1) - tau_target * dp.phi1).cwiseAbs().maxCoeff(),
                                   (apply_rotation(perm, dp.phi2) - std::conj(tau_target) * dp.phi2).cwiseAbs().maxCoeff());
    dp.spectrum = spec;
    dp.lambdaSharp = compute_lambda_sharp(dp, g).lambda;
    return dp;
  }
  if (saw_degenerate) fail(ErrorCode::wrong_symmetry_sector, sector_note.empty() ? "no pair in the tau sectors" : sector_note);
  fail(ErrorCode::no_dirac_point, "no degenerate adjacent pair within tolerance at the vertex");
}

// Rephase Phi1 by exp(i theta) and rebuild Phi2 = conj(Phi1).
inline DiracPointData regauge(const DiracPointData& dp, const LatticeGeometry& g, double theta) {
  DiracPointData out = dp;
  out.phi1 = dp.phi1 * std::polar(1.0, theta);
  out.phi2 = out.phi1.conjugate();
  out.gauge.phase += theta;
  out.lambdaSharp = lambda_sharp_report(g, out.Kstar, *out.basis, out.phi1, out.phi2).lambda;
  return out;
}

struct ConeRadius {
  double r = 0.0;
  std::vector<double> angles;
  std::vector<double> mu_plus, mu_minus;
  std::vector<double> slope;  // (mu_+ - mu_-) / (2 r)
  double slope_plus = 0.0;    // mean (mu_+ - mu*) / r
  double slope_minus = 0.0;   // mean (mu* - mu_-) / r
  double max_E = 0.0;         // max over angles and branches of |E_pm| against |lambda_#|
  double isotropy = 0.0;      // (max - min) / mean of slope over angles
};

struct ConeFitReport {
  std::vector<ConeRadius> radii;
  double lambda_fit = 0.0;         // mean slope at the smallest radius
  double relative_to_lambda = 0.0; // |lambda_fit - |lambda_#|| / |lambda_#|
  double C = 0.0;                  // max over radii of max_E / r
};

inline ConeFitReport verify_cone(const FourierPotential& V, const DiracPointData& dp, const std::vector<double>& radii,
                                 int nangles = 8) {
  const LatticeGeometry& g = V.geom;
  require(!radii.empty(), ErrorCode::invalid_parameter, "verify_cone needs radii");
  const double lam = std::abs(dp.lambdaSharp);
  ConeFitReport rep;
  const int b = dp.bandPair;
  const int nb = b + 3;
  for (double r : radii) {
    require(r > 0.0 && r <= 0.1 * g.q, ErrorCode::invalid_parameter, "cone radii must lie in (0, 0.1 q]");
    ConeRadius cr;
    cr.r = r;
    double smin = 1e300, smax = -1e300, ssum = 0.0;
    for (int a = 0; a < nangles; ++a) {
      const double th = 2.0 * std::numbers::pi * (a + 0.5) / nangles;
      const Vec2 k = dp.Kstar + r * Vec2(std::cos(th), std::sin(th));
      const BlochSolution s = solve_bloch_at(V, k, dp.basis, nb, false);
      const double mm = s.eigenvalues(b), mp = s.eigenvalues(b + 1);
      const double w = mp - mm;
      if ((b > 0 && s.eigenvalues(b - 1) > mm - w) || s.eigenvalues(b + 2) < mp + w)
        fail(ErrorCode::tracking_failure, "a third band enters the cone window");
      cr.angles.push_back(th);
      cr.mu_plus.push_back(mp);
      cr.mu_minus.push_back(mm);
      const double sl = w / (2.0 * r);
      cr.slope.push_back(sl);
      cr.slope_plus += (mp - dp.mustar) / r / nangles;
      cr.slope_minus += (dp.mustar - mm) / r / nangles;
      const double Ep = (mp - dp.mustar) / (lam * r) - 1.0;
      const double Em = (dp.mustar - mm) / (lam * r) - 1.0;
      cr.max_E = std::max({cr.max_E, std::abs(Ep), std::abs(Em)});
      smin = std::min(smin, sl);
      smax = std::max(smax, sl);
      ssum += sl;
    }
    cr.isotropy = (smax - smin) / (ssum / nangles);
    rep.C = std::max(rep.C, cr.max_E / r);
    rep.radii.push_back(cr);
  }
  const auto smallest = std::min_element(rep.radii.begin(), rep.radii.end(),
                                         [](const ConeRadius& x, const ConeRadius& y) { return x.r < y.r; });
  double mean = 0.0;
  for (double s : smallest->slope) mean += s;
  rep.lambda_fit = mean / double(smallest->slope.size());
  rep.relative_to_lambda = std::abs(rep.lambda_fit - lam) / lam;
  return rep;
}

}  // namespace honeydirac
