#include <gtest/gtest.h>

#include <random>

#include "honeydirac/corrector.hpp"

using namespace honeydirac;

namespace {

const LatticeGeometry& geom() {
  static const LatticeGeometry g = build_lattice();
  return g;
}

const FourierPotential& potential() {
  static const FourierPotential V = standard_honeycomb_potential(geom(), 1.0);
  return V;
}

const DiracPointData& dirac() {
  static const DiracPointData dp = locate_dirac_point(potential());
  return dp;
}

const ProfileBasis& profiles() {
  static const ProfileBasis pb = build_profile_basis(potential(), dirac());
  return pb;
}

DiracSymbol symbol(double kappa) {
  const auto ec = coupling_tensor(dirac());
  return {dirac().lambdaSharp, kappa, ec.b1, ec.b2};
}

// Box of 6 x 12 rectangular cells at eps = 1/6: sqrt(3) x 2.
RectGrid coarse(std::size_t n = 32) { return {std::sqrt(3.0), 2.0, n, n}; }

SpinorField packet(const RectGrid& g) {
  GaussianEnvelope e1{0.1, -0.05, 0.3, 2.0, 0.0, 1.0};
  GaussianEnvelope e2{-0.1, 0.1, 0.25, 0.0, -3.0, cplx(0.3, 0.4)};
  return gaussian_spinor(g, e1, e2, 1.0);
}

Eigen::VectorXcd random_vector(long n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> d;
  Eigen::VectorXcd v(n);
  for (long i = 0; i < n; ++i) v(i) = cplx(d(rng), d(rng));
  return v;
}

}  // namespace

TEST(Resolvent, KernelIsProjectedOut) {
  const auto& R = profiles().resolvent;
  EXPECT_LT(R.apply(R.phi[0]).norm(), 1e-12);
  EXPECT_LT(R.apply(R.phi[1]).norm(), 1e-12);
  EXPECT_GT(R.margin, 1.0);
}

TEST(Resolvent, InvertsOnTheRange) {
  const auto& R = profiles().resolvent;
  const Eigen::VectorXcd f = random_vector(long(R.basis->size()), 7);
  const Eigen::VectorXcd u = R.apply(f);
  const Eigen::MatrixXd H = assemble_bloch_hamiltonian(potential(), dirac().Kstar, *R.basis);
  const Eigen::VectorXcd back = R.mustar * u - H.cast<cplx>() * u;
  EXPECT_LT((back - R.project_out(f)).norm() / f.norm(), 1e-8);
  EXPECT_LT(std::abs(R.phi[0].dot(u)), 1e-12 * f.norm());
  EXPECT_LT(std::abs(R.phi[1].dot(u)), 1e-12 * f.norm());
}

TEST(Resolvent, SelfAdjoint) {
  const auto& R = profiles().resolvent;
  const Eigen::VectorXcd f = random_vector(long(R.basis->size()), 11), g = random_vector(long(R.basis->size()), 12);
  EXPECT_LT(std::abs(f.dot(R.apply(g)) - R.apply(f).dot(g)), 1e-10 * f.norm() * g.norm());
}

TEST(Resolvent, SmallMarginIsRejected) {
  EXPECT_THROW(
      {
        try {
          build_partial_resolvent(potential(), dirac(), int(dirac().M), 1e6);
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), ErrorCode::ill_conditioned_resolvent);
          throw;
        }
      },
      Error);
}

TEST(Profiles, ResolvedProfilesAreOrthogonalToKernel) {
  const auto& pb = profiles();
  EXPECT_LT(pb.orthogonality, 1e-10);
  EXPECT_LT(pb.truncated, 1e-7);  // cubic-product tail beyond the disc basis
}

TEST(Profiles, CutoffRefinement) {
  const auto fine = build_profile_basis(potential(), dirac(), int(dirac().M) + 4);
  const auto& pb = profiles();
  double worst = 0.0;
  for (int p = 0; p < ProfileBasis::count; ++p) {
    const auto e = embed_coefficients(pb.resolved[std::size_t(p)], *pb.resolvent.basis, *fine.resolvent.basis);
    worst = std::max(worst, (e - fine.resolved[std::size_t(p)]).norm() / fine.resolved[std::size_t(p)].norm());
  }
  EXPECT_LT(worst, 1e-8);
  for (std::size_t i = 0; i < pb.G.size(); ++i) EXPECT_NEAR(std::abs(pb.G[i] - fine.G[i]), 0.0, 1e-8);
}

// The overlaps reproduce the Dirac symbol and the coupling tensor.
TEST(Profiles, SolvabilityOverlapsMatchEffectiveCoefficients) {
  const auto& pb = profiles();
  const cplx lam = dirac().lambdaSharp;
  EXPECT_LT(std::abs(cplx(0.0, -2.0) * pb.d(1, 0, 0) - lam), 1e-10);
  EXPECT_LT(std::abs(2.0 * pb.d(1, 0, 1) - lam), 1e-10);
  EXPECT_LT(std::abs(pb.d(0, 0, 0)), 1e-10);
  const auto ec = coupling_tensor(dirac());
  for (int n = 0; n < 2; ++n)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) EXPECT_NEAR(std::abs(pb.t(n, j, k, l) - ec(j, k, l, n)), 0.0, 1e-12);
}

TEST(Corrector, ConstantAlphaLinearGivesZero) {
  const auto g = coarse(16);
  SpinorField a(g);
  a.alpha1.fill(cplx(0.7, 0.2));
  a.alpha2.fill(cplx(-0.1, 0.5));
  const auto cd = build_u1_perp(a, profiles(), 0.0);
  for (const auto& c : cd.c)
    for (const auto& v : c) EXPECT_LT(std::abs(v), 1e-13);
}

TEST(Corrector, FredholmResidualForSolverDerivative) {
  const auto g = coarse();
  const auto a = packet(g);
  const auto sym = symbol(1.0);
  const auto da = alpha_time_derivative(a, sym);
  const auto cd = build_u1_perp(a, profiles(), 1.0, &da);
  EXPECT_LT(cd.fredholm_residual, 1e-9);
  SpinorField wrong = da;
  wrong.alpha1 *= cplx(1.01);
  EXPECT_THROW(build_u1_perp(a, profiles(), 1.0, &wrong), Error);
}

// u1perp from the decomposition against L0^{-1} applied to the assembled
// right-hand side at single points, with the resolvent solved by LU.
TEST(Corrector, DecompositionExactness) {
  const auto g = coarse();
  const double kappa = -1.0;
  const auto a = packet(g);
  const auto cd = build_u1_perp(a, profiles(), kappa);
  const auto& pb = profiles();
  const auto& R = pb.resolvent;
  const auto& basis = *R.basis;
  const Eigen::MatrixXcd H = assemble_bloch_hamiltonian(potential(), dirac().Kstar, basis).cast<cplx>();
  Eigen::MatrixXcd A = R.mustar * Eigen::MatrixXcd::Identity(H.rows(), H.cols()) - H;
  for (const auto& p : R.phi) A += p * p.adjoint();
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
  const std::size_t N = pb.torus;
  const ComplexField chi1 = periodic_part_on_torus(basis, R.phi[0], N), chi2 = periodic_part_on_torus(basis, R.phi[1], N);
  ComplexField dx[2][2];
  for (int j = 0; j < 2; ++j)
    for (int l = 0; l < 2; ++l) dx[j][l] = spectral_derivative(a[j], g, l);
  std::mt19937 rng(3);
  std::uniform_int_distribution<std::size_t> pick(0, g.nx - 1);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t i = pick(rng), j = pick(rng);
    const cplx a1 = a.alpha1(i, j), a2 = a.alpha2(i, j);
    // 2 grad_x u0 . grad_y u0 - kappa |u0|^2 u0
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(long(basis.size()));
    for (int jj = 0; jj < 2; ++jj)
      for (int l = 0; l < 2; ++l) rhs += 2.0 * dx[jj][l](i, j) * cell_derivative(R.phi[jj], basis, geom(), dirac().Kstar, l);
    ComplexField cube(N, N);
    for (std::size_t q = 0; q < N * N; ++q) {
      const cplx u = a1 * chi1[q] + a2 * chi2[q];
      cube[q] = std::norm(u) * u;
    }
    rhs -= kappa * torus_to_coefficients(cube, basis);
    const Eigen::VectorXcd direct = -R.project_out(lu.solve(R.project_out(rhs)));
    const Eigen::VectorXcd decomposed = u1_perp_profile_at(cd, pb, i, j);
    EXPECT_LT((direct - decomposed).norm(), 1e-9 * std::max(1.0, direct.norm())) << "point " << i << "," << j;
    EXPECT_LT(std::abs(R.phi[0].dot(decomposed)), 1e-10 * std::max(1.0, direct.norm()));
  }
}

TEST(Theta, ZeroAlphaGivesZero) {
  const auto g = coarse(16);
  SpinorField a(g);
  const auto cd = build_u1_perp(a, profiles(), 1.0);
  const auto th = build_theta_sources(a, cd, profiles(), 1.0);
  EXPECT_EQ(th.sup(0), 0.0);
  EXPECT_EQ(th.sup(1), 0.0);
}

TEST(Theta, LinearInCorrector) {
  const auto g = coarse();
  const auto a = packet(g);
  for (double kappa : {0.0, 1.0}) {
    auto cd = build_u1_perp(a, profiles(), kappa);
    const auto th1 = build_theta_sources(a, cd, profiles(), kappa);
    for (auto& c : cd.c) c *= cplx(2.0);
    const auto th2 = build_theta_sources(a, cd, profiles(), kappa);
    double worst = 0.0, scale = 0.0;
    for (int n = 0; n < 2; ++n) {
      const ComplexField lap = spectral_laplacian(a[n], g);
      for (std::size_t q = 0; q < lap.size(); ++q) {
        const cplx d1 = th1[n][q] - lap[q], d2 = th2[n][q] - lap[q];
        worst = std::max(worst, std::abs(d2 - 2.0 * d1));
        scale = std::max(scale, std::abs(d1));
      }
    }
    EXPECT_GT(scale, 1e-3);
    EXPECT_LT(worst, 1e-10 * scale) << "kappa " << kappa;
  }
}

// kappa = 0 and alpha_j = a_j exp(i xi.x):
// Theta_n = [-|xi|^2 a_n + 4 sum_{j,l,l'} xi_l xi_l' a_j G(n, (j,l), l')] exp(i xi.x).
TEST(Theta, SingleModeClosedForm) {
  const auto g = coarse(16);
  const long n1 = 2, n2 = -1;
  const double x1 = 2 * std::numbers::pi * n1 / g.L1, x2 = 2 * std::numbers::pi * n2 / g.L2;
  const cplx amp[2] = {cplx(0.6, -0.2), cplx(0.1, 0.3)};
  SpinorField a(g);
  for (std::size_t i = 0; i < g.nx; ++i)
    for (std::size_t j = 0; j < g.ny; ++j) {
      const cplx e = std::polar(1.0, x1 * g.x(i) + x2 * g.y(j));
      a.alpha1(i, j) = amp[0] * e;
      a.alpha2(i, j) = amp[1] * e;
    }
  const auto& pb = profiles();
  const auto th = build_theta_sources(a, build_u1_perp(a, pb, 0.0), pb, 0.0);
  const double xi[2] = {x1, x2};
  for (int n = 0; n < 2; ++n) {
    cplx c = -(x1 * x1 + x2 * x2) * amp[n];
    for (int j = 0; j < 2; ++j)
      for (int l = 0; l < 2; ++l)
        for (int lp = 0; lp < 2; ++lp) c += 4.0 * xi[l] * xi[lp] * amp[j] * pb.g(n, ProfileBasis::derivative_index(j, l), lp);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.nx; ++i)
      for (std::size_t j = 0; j < g.ny; ++j)
        worst = std::max(worst, std::abs(th[n](i, j) - c * std::polar(1.0, x1 * g.x(i) + x2 * g.y(j))));
    EXPECT_LT(worst, 1e-8 * std::abs(c));
  }
}

TEST(Wkb, SingleBlochWave) {
  const double eps = 1.0 / 6;
  const auto fine = build_commensurate_grid(geom(), eps, 6, 12, 12, 8);
  SpinorField a(coarse(8));
  a.alpha1.fill(1.0);
  a.t = 0.3;
  const ComplexField psi = assemble_wkb_field(a, nullptr, nullptr, dirac(), nullptr, fine, WkbOrder::zero);
  const cplx ph = std::polar(1.0, -dirac().mustar * 0.3 / eps);
  double worst = 0.0;
  for (std::size_t i = 0; i < fine.nx; i += 7)
    for (std::size_t j = 0; j < fine.ny; j += 5) {
      const Vec2 y(fine.x(i) / eps, fine.y(j) / eps);
      cplx phi = 0.0;
      for (std::size_t p = 0; p < dirac().basis->size(); ++p)
        phi += dirac().phi1(long(p)) * std::exp(cplx(0.0, geom().shifted_vector((*dirac().basis)[p], dirac().Kstar).dot(y)));
      worst = std::max(worst, std::abs(psi(i, j) - ph * phi));
    }
  EXPECT_LT(worst, 1e-7);  // modes beyond 12 x 8 points per cell carry ~4e-8
}

// Order zero: cross terms Phi1 conj(Phi2) average out. Order one adds
// eps^2 ||u1perp||^2 since u1perp is orthogonal to the Bloch pair cell by cell.
TEST(Wkb, MassTendsToEnvelopeMass) {
  const auto g = coarse();
  const auto a = packet(g);
  const double m0 = a.mass();
  const auto cd = build_u1_perp(a, profiles(), 1.0);
  SpinorField beta(g);
  std::vector<double> e0, e1;
  for (int k : {1, 2, 4}) {
    const double eps = 1.0 / (6 * k);
    const auto fine = build_commensurate_grid(geom(), eps, 6 * k, 12 * k, 12, 8);
    const ComplexField z = assemble_wkb_field(a, nullptr, nullptr, dirac(), nullptr, fine, WkbOrder::zero);
    const ComplexField o = assemble_wkb_field(a, &beta, &cd, dirac(), &profiles(), fine, WkbOrder::one);
    e0.push_back(std::abs(l2_norm_sq(z, fine) - m0) / m0);
    e1.push_back(std::abs(l2_norm_sq(o, fine) - m0) / m0);
    EXPECT_LT(e0.back(), eps) << "eps " << eps;
  }
  EXPECT_NEAR(std::log2(e1[0] / e1[1]), 2.0, 0.2);
  EXPECT_NEAR(std::log2(e1[1] / e1[2]), 2.0, 0.2);
}

TEST(Wkb, GagliardoNirenbergFactor) {
  const auto g = coarse();
  const auto a = packet(g);
  std::vector<double> ratio;
  for (int k : {1, 2, 4}) {
    const double eps = 1.0 / (6 * k);
    const auto fine = build_commensurate_grid(geom(), eps, 6 * k, 12 * k, 12, 8);
    const ComplexField psi = assemble_wkb_field(a, nullptr, nullptr, dirac(), nullptr, fine, WkbOrder::zero);
    double sup = 0.0;
    for (const auto& v : psi) sup = std::max(sup, std::abs(v));
    ratio.push_back(sup / (scaled_sobolev_norm(psi, fine, 2, eps) / eps));
  }
  // sup |f| <= C eps^{-1} ||f||_{H^2_eps}: the ratio decays like eps.
  for (double r : ratio) EXPECT_LT(r, 1.0);
  EXPECT_NEAR(ratio[0] / ratio[1], 2.0, 0.3);
  EXPECT_NEAR(ratio[1] / ratio[2], 2.0, 0.3);
}

TEST(Wkb, GaugeCovariance) {
  const double theta = 0.9;
  const auto dp2 = regauge(dirac(), geom(), theta);
  const auto pb2 = build_profile_basis(potential(), dp2);
  const auto g = coarse();
  const auto a = packet(g);
  SpinorField b = a;
  b.alpha1 *= std::polar(1.0, -theta);
  b.alpha2 *= std::polar(1.0, theta);
  const auto fine = build_commensurate_grid(geom(), 1.0 / 6, 6, 12, 12, 8);
  SpinorField beta(g);
  const auto cd1 = build_u1_perp(a, profiles(), 1.0), cd2 = build_u1_perp(b, pb2, 1.0);
  const ComplexField p1 = assemble_wkb_field(a, &beta, &cd1, dirac(), &profiles(), fine, WkbOrder::one);
  const ComplexField p2 = assemble_wkb_field(b, &beta, &cd2, dp2, &pb2, fine, WkbOrder::one);
  double worst = 0.0, sup = 0.0;
  for (std::size_t q = 0; q < p1.size(); ++q) {
    worst = std::max(worst, std::abs(std::abs(p1[q]) - std::abs(p2[q])));
    sup = std::max(sup, std::abs(p1[q]));
  }
  EXPECT_LT(worst, 1e-10 * sup);
}

TEST(Norms, SobolevSingleMode) {
  const RectGrid g{2.0, 3.0, 16, 24};
  const double eps = 0.2, x1 = 2 * std::numbers::pi * 3 / g.L1, x2 = 2 * std::numbers::pi * -2 / g.L2;
  ComplexField f(g.nx, g.ny);
  for (std::size_t i = 0; i < g.nx; ++i)
    for (std::size_t j = 0; j < g.ny; ++j) f(i, j) = std::polar(1.0, x1 * g.x(i) + x2 * g.y(j));
  const double n0 = scaled_sobolev_norm(f, g, 0, eps), n1 = scaled_sobolev_norm(f, g, 1, eps);
  EXPECT_NEAR(n0 * n0, g.area(), 1e-10);
  EXPECT_NEAR(n1 * n1, (1 + eps * eps * (x1 * x1 + x2 * x2)) * g.area(), 1e-10);
  EXPECT_GT(scaled_sobolev_norm(f, g, 2, eps), n1);
}
