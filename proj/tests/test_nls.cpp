#include <gtest/gtest.h>

#include "honeydirac/bloch.hpp"
#include "honeydirac/nls.hpp"
#include "honeydirac/twoscale.hpp"

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

ComplexField bloch_wave(const CommensurateGrid& g, cplx factor = 1.0) {
  ComplexField spec(g.nx, g.ny);
  const RectGrid unit{g.L1, g.L2, 1, 1};
  place_two_scale(unit_envelope_spectrum(), unit, {dirac().basis, dirac().phi1, Anchor::K}, g, spec, factor);
  return fft_backward(spec);
}

// Band-limited periodic envelope times a Bloch wave: exactly representable on the grid.
ComplexField packet(const CommensurateGrid& g, double amp) {
  ComplexField psi = bloch_wave(g);
  const double tp = 2 * std::numbers::pi;
  for (std::size_t i = 0; i < g.nx; ++i)
    for (std::size_t j = 0; j < g.ny; ++j) {
      const double u = g.x(i) / g.L1, v = g.y(j) / g.L2;
      psi(i, j) *= amp * (1.0 + 0.4 * std::cos(tp * u) + 0.3 * std::sin(tp * v) + 0.2 * std::cos(tp * (u + v)));
    }
  return psi;
}

double max_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace

TEST(Nls, GridArithmetic) {
  const auto g = build_commensurate_grid(geom(), 1.0 / 6, 36, 12, 8, 8);
  EXPECT_EQ(g.nx, 288u);
  EXPECT_EQ(g.K_shift().second, 8);
  const auto [f1, f2] = g.frequency_index(geom().K / g.eps);
  EXPECT_EQ(f1, 0);
  EXPECT_EQ(f2, 8);
  const auto [a1, a2] = g.frequency_index(geom().k1 / g.eps);
  EXPECT_EQ(a1, 36);
  EXPECT_EQ(a2, 12);
  const auto h = build_commensurate_grid(geom(), 1.0 / 12, 72, 24, 8, 8);
  EXPECT_NEAR(h.L1, g.L1, 1e-12);
  EXPECT_NEAR(h.L2, g.L2, 1e-12);
  EXPECT_THROW(build_commensurate_grid(geom(), 1.0 / 6, 36, 13, 8, 8), Error);
}

TEST(Nls, FreeEvolutionPerMode) {
  const auto V0 = standard_honeycomb_potential(geom(), 0.0);
  const auto g = build_commensurate_grid(geom(), 1.0 / 6, 4, 6, 8, 8);
  NlsLinearPropagator lin(V0, g, NlsLinearScheme::exact_blocks);
  const long n1 = 3, n2 = -5;
  const double x1 = 2 * std::numbers::pi * n1 / g.L1, x2 = 2 * std::numbers::pi * n2 / g.L2;
  ComplexField psi(g.nx, g.ny);
  for (std::size_t i = 0; i < g.nx; ++i)
    for (std::size_t j = 0; j < g.ny; ++j) psi(i, j) = std::polar(1.0, x1 * g.x(i) + x2 * g.y(j));
  NlsRunOptions o;
  o.T = 0.3;
  o.kappa = 0.0;
  o.snapshots = 1;
  o.keep_snapshots = true;
  const auto tr = solve_nls(psi, lin, o);
  const cplx ph = std::polar(1.0, -g.eps * (x1 * x1 + x2 * x2) * 0.3);
  ComplexField ex = psi;
  ex *= ph;
  EXPECT_LT(max_diff(tr.snapshots.back(), ex), 1e-11);
}

TEST(Nls, BlockStructure) {
  const auto g = build_commensurate_grid(geom(), 1.0 / 6, 4, 6, 12, 8);
  NlsLinearPropagator lin(potential(), g, NlsLinearScheme::exact_blocks);
  EXPECT_EQ(lin.block_size(), 48u);
  EXPECT_EQ(lin.block_count(), 48u);
  EXPECT_EQ(lin.block_size() * lin.block_count(), g.nx * g.ny);
  // The block through K/eps carries mu*/eps as a double eigenvalue.
  const auto [k1, k2] = g.K_shift();
  const auto ev = lin.block_eigenvalues_at(slot_of(k1, g.nx) * g.ny + slot_of(k2, g.ny));
  ASSERT_EQ(ev.size(), 48u);
  EXPECT_NEAR(ev[0] * g.eps, dirac().mustar, 1e-9);
  EXPECT_NEAR(ev[1] * g.eps, dirac().mustar, 1e-9);
}

TEST(Nls, StationaryBlochMode) {
  const double eps = 1.0 / 6;
  const auto g = build_commensurate_grid(geom(), eps, 6, 12, 12, 8);
  NlsLinearPropagator lin(potential(), g, NlsLinearScheme::exact_blocks);
  const ComplexField psi0 = bloch_wave(g);
  NlsRunOptions o;
  o.T = 0.5;
  o.dt = eps / 8;
  o.kappa = 0.0;
  o.snapshots = 5;
  double worst = 0.0, sup = 0.0;
  const auto tr = solve_nls(psi0, lin, o, [&](double t, const ComplexField& psi) {
    ComplexField ex = psi0;
    ex *= std::polar(1.0, -dirac().mustar * t / eps);
    worst = std::max(worst, max_diff(psi, ex));
  });
  for (const auto& v : psi0) sup = std::max(sup, std::abs(v));
  EXPECT_LT(worst, 1e-6);
  EXPECT_LT(worst / sup, 1e-6);
  for (const auto& ob : tr.observables) EXPECT_NEAR(ob.sup, tr.observables.front().sup, 1e-6);
}

// The kinetic/potential split cannot hold a Bloch mode at dt = eps/8: the
// splitting error is O((dt/eps)^2) per unit of eps-time.
TEST(Nls, KineticPotentialSplitLosesStationarity) {
  const double eps = 1.0 / 6;
  const auto g = build_commensurate_grid(geom(), eps, 6, 12, 12, 8);
  NlsLinearPropagator lin(potential(), g, NlsLinearScheme::kinetic_potential);
  const ComplexField psi0 = bloch_wave(g);
  NlsRunOptions o;
  o.T = 0.5;
  o.dt = eps / 8;
  o.kappa = 0.0;
  o.snapshots = 1;
  o.keep_snapshots = true;
  const auto tr = solve_nls(psi0, lin, o);
  ComplexField ex = psi0;
  ex *= std::polar(1.0, -dirac().mustar * 0.5 / eps);
  EXPECT_GT(max_diff(tr.snapshots.back(), ex), 1e-3);
}

TEST(Nls, MassConservation) {
  const double eps = 1.0 / 6;
  const auto g = build_commensurate_grid(geom(), eps, 6, 12, 12, 8);
  NlsLinearPropagator lin(potential(), g, NlsLinearScheme::exact_blocks);
  NlsRunOptions o;
  o.dt = eps / 8;
  o.T = 1000 * o.dt;
  o.kappa = 1.0;
  o.snapshots = 10;
  const auto tr = solve_nls(packet(g, 2.0), lin, o);
  EXPECT_EQ(tr.steps, 1000);
  const double m0 = tr.observables.front().mass;
  for (const auto& ob : tr.observables) EXPECT_LT(std::abs(ob.mass - m0) / m0, 1e-12);
}

TEST(Nls, GlobalPhaseCommutes) {
  const double eps = 1.0 / 6;
  const auto g = build_commensurate_grid(geom(), eps, 6, 12, 12, 8);
  NlsLinearPropagator lin(potential(), g, NlsLinearScheme::exact_blocks);
  NlsRunOptions o;
  o.T = 0.1;
  o.kappa = -1.0;
  o.snapshots = 1;
  o.keep_snapshots = true;
  const ComplexField a0 = packet(g, 1.5);
  ComplexField b0 = a0;
  const cplx ph = std::polar(1.0, 0.7);
  b0 *= ph;
  auto a = solve_nls(a0, lin, o).snapshots.back();
  const auto b = solve_nls(b0, lin, o).snapshots.back();
  a *= ph;
  EXPECT_LT(max_diff(a, b), 1e-12);
}

TEST(Nls, StrangSecondOrderInTime) {
  const double eps = 1.0 / 6;
  const auto g = build_commensurate_grid(geom(), eps, 6, 12, 12, 8);
  NlsLinearPropagator lin(potential(), g, NlsLinearScheme::exact_blocks);
  const ComplexField p0 = packet(g, 1.0);
  auto run = [&](double dt) {
    NlsRunOptions o;
    o.T = 0.25;
    o.dt = dt;
    o.kappa = 1.0;
    o.snapshots = 1;
    o.keep_snapshots = true;
    return solve_nls(p0, lin, o).snapshots.back();
  };
  const double dt = eps / 64;
  const auto a = run(dt), b = run(dt / 2), r = run(dt / 32);
  const auto diff = [&](const ComplexField& x) {
    ComplexField d = x;
    d -= r;
    return std::sqrt(l2_norm_sq(d, g));
  };
  EXPECT_NEAR(std::log2(diff(a) / diff(b)), 2.0, 0.1);
}

double refinement_gap(double eps, double kappa, double amp) {
  const int cx = int(std::lround(1 / eps)), cy = 2 * cx;
  const auto g1 = build_commensurate_grid(geom(), eps, cx, cy, 12, 8);
  const auto g2 = build_commensurate_grid(geom(), eps, cx, cy, 24, 16);
  NlsLinearPropagator l1(potential(), g1, NlsLinearScheme::exact_blocks);
  NlsLinearPropagator l2(potential(), g2, NlsLinearScheme::exact_blocks);
  NlsRunOptions o;
  o.T = 0.5;
  o.dt = eps / 16;
  o.kappa = kappa;
  o.snapshots = 1;
  o.keep_snapshots = true;
  const auto a = solve_nls(packet(g1, amp), l1, o).snapshots.back();
  const auto b = solve_nls(packet(g2, amp), l2, o).snapshots.back();
  ComplexField d = a;
  d -= spectral_resample(b, g2, g1);
  return std::sqrt(l2_norm_sq(d, g1) / l2_norm_sq(a, g1));
}

TEST(Nls, PointsPerCellRefinementLinear) {
  EXPECT_LT(refinement_gap(1.0 / 6, 0.0, 1.0), 1e-7);
  EXPECT_LT(refinement_gap(1.0 / 12, 0.0, 1.0), 1e-7);
}

// The pointwise cubic step aliases harmonics of the Bloch profile; at 12x8
// points per cell this costs about 2e-5 relative for unit-size data.
TEST(Nls, PointsPerCellRefinementCubic) { EXPECT_LT(refinement_gap(1.0 / 6, 1.0, 0.5), 1e-4); }
