#include <gtest/gtest.h>

#include <random>

#include "honeydirac/bloch.hpp"

using namespace honeydirac;

namespace {

const LatticeGeometry& geom() {
  static const LatticeGeometry g = build_lattice();
  return g;
}

const DiracPointData& dirac() {
  static const DiracPointData dp = locate_dirac_point(standard_honeycomb_potential(geom(), 1.0));
  return dp;
}

}  // namespace

TEST(Bloch, FreeHamiltonianIsDiagonal) {
  const auto& g = geom();
  const auto V = standard_honeycomb_potential(g, 0.0);
  const Vec2 k(0.3, -0.2);
  const auto basis = PlaneWaveBasis::box(3);
  const MatrixXd H = assemble_bloch_hamiltonian(V, k, basis);
  for (std::size_t p = 0; p < basis.size(); ++p)
    for (std::size_t q = 0; q < basis.size(); ++q)
      EXPECT_EQ(H(long(p), long(q)), p == q ? g.shifted_vector(basis[p], k).squaredNorm() : 0.0);
}

TEST(Bloch, FreeSpectrumAtKIsTriple) {
  const auto& g = geom();
  const auto V = standard_honeycomb_potential(g, 0.0);
  const auto s = solve_bloch(assemble_bloch_hamiltonian(V, g.K, 6), 4);
  const double expect = g.q * g.q / 3.0;  // |K|^2 with K = (k1 - k2)/3
  for (int b = 0; b < 3; ++b) EXPECT_NEAR(s.eigenvalues(b), expect, 1e-12);
  EXPECT_GT(s.eigenvalues(3), expect + 1.0);
}

TEST(Bloch, HamiltonianSymmetric) {
  const auto& g = geom();
  const auto V = standard_honeycomb_potential(g, 1.0);
  const MatrixXd H = assemble_bloch_hamiltonian(V, Vec2(0.1, 0.7), 5);
  EXPECT_EQ((H - H.transpose()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(H.rows(), 121);
}

TEST(Bloch, FreeGroundStateAtGamma) {
  const auto& g = geom();
  const auto V = standard_honeycomb_potential(g, 0.0);
  const auto basis = PlaneWaveBasis::box(4);
  const auto s = solve_bloch(assemble_bloch_hamiltonian(V, Vec2::Zero(), basis), 2);
  EXPECT_NEAR(s.eigenvalues(0), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(s.eigenvectors(basis.position({0, 0}), 0)), 1.0, 1e-13);
}

TEST(Bloch, BandPeriodicityAndInversion) {
  const auto& g = geom();
  const auto V = standard_honeycomb_potential(g, 1.0);
  const Vec2 k(0.41, 1.13);
  const int M = 10, nb = 6;
  auto mk = [&](const Vec2& kk) {
    return solve_bloch_at(V, kk, std::make_shared<const PlaneWaveBasis>(PlaneWaveBasis::disc(g, kk, M)), nb, false);
  };
  const auto s0 = mk(k), s1 = mk(k + g.k1), s2 = mk(-k);
  for (int b = 0; b < nb; ++b) {
    EXPECT_NEAR(s0.eigenvalues(b), s1.eigenvalues(b), 1e-9);
    EXPECT_NEAR(s0.eigenvalues(b), s2.eigenvalues(b), 1e-9);
  }
}

TEST(Bloch, BandStructureAlongClosedPath) {
  const auto& g = geom();
  const auto V = standard_honeycomb_potential(g, 1.0);
  const auto path = high_symmetry_path(g, {"G", "K", "M", "G"}, 4);
  const auto rows = band_structure(V, path, 8, 5);
  ASSERT_EQ(rows.size(), path.size());
  for (const auto& r : rows)
    for (int b = 1; b < 5; ++b) EXPECT_LE(r.mu(b - 1), r.mu(b));
  for (int b = 0; b < 5; ++b) EXPECT_NEAR(rows.front().mu(b), rows.back().mu(b), 1e-12);
}

TEST(Bloch, DiracPointStandardPotential) {
  const auto& dp = dirac();
  EXPECT_EQ(dp.bandPair, 0);
  EXPECT_LT(dp.gap, 1e-8 * (1.0 + std::abs(dp.mustar)));
  EXPECT_LT(std::abs(dp.rotationEigs[0] - geom().tau), 1e-8);
  EXPECT_LT(std::abs(dp.rotationEigs[1] - std::conj(geom().tau)), 1e-8);
  EXPECT_LT(dp.commutator, 1e-12 * (1.0 + dp.spectrum->eigenvalues.cwiseAbs().maxCoeff()));
  EXPECT_LT(dp.rotationResidual, 1e-10);
  EXPECT_LT(dp.phi2RelationError, 1e-10);
  EXPECT_NEAR(dp.phi1.norm(), 1.0, 1e-12);
  EXPECT_NEAR(dp.phi2.norm(), 1.0, 1e-12);
  EXPECT_LT(std::abs(dp.phi1.dot(dp.phi2)), 1e-12);
  // Gauge: the chosen coefficient is real positive and maximal.
  const long p = dp.basis->position(dp.gauge.index);
  EXPECT_EQ(dp.phi1(p).imag(), 0.0);
  EXPECT_GT(dp.phi1(p).real(), 0.0);
  EXPECT_NEAR(dp.phi1(p).real(), dp.phi1.cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Bloch, CutoffConvergence) {
  const auto V = standard_honeycomb_potential(geom(), 1.0);
  DiracOptions o;
  std::vector<double> mu;
  for (int M : {2, 4, 6, 8}) {
    o.M = M;
    mu.push_back(locate_dirac_point(V, o).mustar);
  }
  const double mu_ref = dirac().mustar;
  for (std::size_t i = 0; i + 1 < mu.size(); ++i) {
    const double d0 = std::abs(mu[i] - mu_ref), d1 = std::abs(mu[i + 1] - mu_ref);
    if (d0 < 1e-12) break;
    EXPECT_LT(d1, 0.1 * d0);
  }
}

TEST(Bloch, PerturbationOpensGap) {
  const auto& g = geom();
  auto V = standard_honeycomb_potential(g, 1.0);
  V.coeffs[{1, 0}] += 0.1;
  V.coeffs[{-1, 0}] += 0.1;
  EXPECT_THROW(locate_dirac_point(V), Error);
  auto basis = std::make_shared<const PlaneWaveBasis>(PlaneWaveBasis::disc(g, g.K, 12));
  const auto s = solve_bloch_at(V, g.K, basis, 2, false);
  EXPECT_GT(s.eigenvalues(1) - s.eigenvalues(0), 1e-3);
}

TEST(Bloch, LambdaSharpIdentities) {
  const auto& g = geom();
  const auto& dp = dirac();
  const auto rep = compute_lambda_sharp(dp, g);
  EXPECT_LT(rep.diagonal_max, 1e-10);
  EXPECT_LT(rep.relative_disagreement, 1e-8);
  EXPECT_LT(rep.fourier_disagreement, 1e-8);
  std::mt19937 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int t = 0; t < 8; ++t) {
    const Vec2 z(n(rng), n(rng));
    EXPECT_LT(std::abs(grad_inner(dp.phi1, dp.phi1, *dp.basis, g, dp.Kstar, z)), 1e-10 * (1 + z.norm()));
    EXPECT_LT(std::abs(grad_inner(dp.phi2, dp.phi2, *dp.basis, g, dp.Kstar, z)), 1e-10 * (1 + z.norm()));
    const cplx a = cplx(0, 2) * grad_inner(dp.phi1, dp.phi2, *dp.basis, g, dp.Kstar, z);
    const cplx b = cplx(0, 2) * grad_inner(dp.phi2, dp.phi1, *dp.basis, g, dp.Kstar, z);
    EXPECT_LT(std::abs(a - std::conj(b)), 1e-10 * std::abs(b));
    EXPECT_LT(std::abs(a + std::conj(dp.lambdaSharp) * cplx(z.x(), z.y())), 1e-10 * std::abs(a));
    EXPECT_LT(std::abs(b + dp.lambdaSharp * cplx(z.x(), -z.y())), 1e-10 * std::abs(b));
  }
}

TEST(Bloch, GaugeCovariance) {
  const auto& g = geom();
  const auto& dp = dirac();
  const double th = std::numbers::pi / 5;
  const auto dq = regauge(dp, g, th);
  EXPECT_LT(std::abs(dq.lambdaSharp - std::polar(1.0, 2 * th) * dp.lambdaSharp), 1e-12 * std::abs(dp.lambdaSharp));
  EXPECT_NEAR(std::abs(dq.lambdaSharp), std::abs(dp.lambdaSharp), 1e-12);
}

TEST(Bloch, ConeFit) {
  const auto& g = geom();
  const auto V = standard_honeycomb_potential(g, 1.0);
  const auto& dp = dirac();
  // Trigonal warping from the nearby third band makes the slope anisotropy
  // grow like ~37 r/q, so isotropy at the 2% level needs r below ~5e-4 q.
  const std::vector<double> radii{2e-3 * g.q, 1e-3 * g.q, 5e-4 * g.q, 2.5e-4 * g.q};
  const auto rep = verify_cone(V, dp, radii);
  EXPECT_LT(rep.relative_to_lambda, 0.02);
  const auto& small = rep.radii.back();
  EXPECT_LT(small.isotropy, 0.02);
  EXPECT_LT(std::abs(small.slope_plus - small.slope_minus) / small.slope_plus, 0.01);
  for (std::size_t i = 0; i + 1 < rep.radii.size(); ++i) {
    const double ratio = rep.radii[i + 1].max_E / rep.radii[i].max_E;
    EXPECT_NEAR(ratio, 0.5, 0.15);
  }
  EXPECT_GT(rep.C, 0.0);
}
