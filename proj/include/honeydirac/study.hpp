#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "honeydirac/config.hpp"
#include "honeydirac/corrector.hpp"
#include "honeydirac/dirac2d.hpp"
#include "honeydirac/effcoef.hpp"
#include "honeydirac/nls.hpp"

namespace honeydirac {

// Everything the study needs that does not depend on eps.
struct StudySetup {
  SimConfig config;
  FourierPotential V;
  DiracPointData dp;
  EffectiveCoefficients ec;
  ProfileBasis pb;
  RectGrid coarse;  // envelope grid over the fixed box
};

inline RectGrid study_box(const SimConfig& c) {
  const double eps0 = c.eps_ladder.front();
  const double L1 = double(c.grid.cells_x) * eps0 * std::sqrt(3.0) * c.lattice_a;
  const double L2 = double(c.grid.cells_y) * eps0 * c.lattice_a;
  return {L1, L2, std::size_t(c.grid.coarse_nx), std::size_t(c.grid.coarse_ny)};
}

inline StudySetup prepare_study(const SimConfig& c) {
  validate(c);
  StudySetup s{c, build_potential(c), {}, {}, {}, study_box(c)};
  DiracOptions opt;
  opt.M = c.M;
  opt.bandPair = c.band_pair;
  opt.tolDegeneracy = c.degeneracy_tol;
  s.dp = locate_dirac_point(s.V, opt);
  s.ec = coupling_tensor(s.dp);
  s.pb = build_profile_basis(s.V, s.dp);
  return s;
}

inline DiracSymbol study_symbol(const StudySetup& s, double kappa) { return {s.dp.lambdaSharp, kappa, s.ec.b1, s.ec.b2}; }

// Initial envelope alpha0; with randomize the Gaussian parameters are drawn from the seed.
inline SpinorField initial_envelope(const SimConfig& c, const RectGrid& g) {
  GaussianEnvelope e1 = c.envelope.alpha1, e2 = c.envelope.alpha2;
  if (c.envelope.randomize) {
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (GaussianEnvelope* e : {&e1, &e2}) {
      e->x1 += 0.1 * g.L1 * u(rng);
      e->x2 += 0.1 * g.L2 * u(rng);
      e->p1 += 2.0 * u(rng);
      e->p2 += 2.0 * u(rng);
      e->weight *= std::polar(1.0 + 0.25 * u(rng), std::numbers::pi * u(rng));
    }
  }
  return gaussian_spinor(g, e1, e2, c.envelope.mass);
}

// alpha, beta and the corrector fields at the output times.
struct EnvelopeSample {
  SpinorField alpha, beta;
  CorrectorData cd;
};

struct EnvelopeTrajectory {
  std::vector<EnvelopeSample> samples;
  double dt = 0.0;
  long steps = 0;
  bool blow_up = false;
  double fredholm_max = 0.0;
  double mass_drift = 0.0;  // relative, over the run
  double edge_mass = 0.0;   // max fraction of |alpha|^2 within a tenth of the box from its edges
};

inline double edge_mass_fraction(const SpinorField& a) {
  const RectGrid& g = a.grid;
  double edge = 0.0, total = 0.0;
  for (std::size_t i = 0; i < g.nx; ++i)
    for (std::size_t j = 0; j < g.ny; ++j) {
      const double w = std::norm(a.alpha1(i, j)) + std::norm(a.alpha2(i, j));
      total += w;
      const double u = g.x(i) / g.L1, v = g.y(j) / g.L2;
      if (u < 0.1 || u > 0.9 || v < 0.1 || v > 0.9) edge += w;
    }
  return total > 0 ? edge / total : 0.0;
}

// Steps the nonlinear Dirac system and, jointly, the inhomogeneous system for
// beta with beta(0) = 0 (Theta rebuilt from alpha at every step).
inline EnvelopeTrajectory solve_envelopes(const SpinorField& alpha0, const DiracSymbol& sym, const ProfileBasis& pb,
                                          double T, double dt_nominal, int snapshots, bool with_beta,
                                          double fredholm_tol = 1e-9) {
  EnvelopeTrajectory tr;
  tr.steps = step_count(T, dt_nominal, snapshots);
  tr.dt = T / double(tr.steps);
  const long stride = tr.steps / snapshots;
  SpinorField alpha = alpha0, beta(alpha0.grid, alpha0.t);
  const double m0 = alpha.mass(), sup0 = std::max({alpha.sup(0), alpha.sup(1), 1e-300});
  auto theta_of = [&](const SpinorField& a) {
    return build_theta_sources(a, build_u1_perp(a, pb, sym.kappa), pb, sym.kappa);
  };
  auto record = [&]() {
    const SpinorField da = alpha_time_derivative(alpha, sym);
    CorrectorData cd = build_u1_perp(alpha, pb, sym.kappa, &da, fredholm_tol);
    tr.fredholm_max = std::max(tr.fredholm_max, cd.fredholm_residual);
    tr.mass_drift = std::max(tr.mass_drift, std::abs(alpha.mass() - m0) / m0);
    tr.edge_mass = std::max(tr.edge_mass, edge_mass_fraction(alpha));
    tr.samples.push_back({alpha, beta, std::move(cd)});
  };
  record();
  SpinorField theta = with_beta ? theta_of(alpha) : SpinorField();
  const double t0 = alpha0.t;
  for (long k = 0; k < tr.steps; ++k) {
    SpinorField next = alpha;
    dirac_strang_step(next, tr.dt, sym);
    next.t = t0 + double(k + 1) * tr.dt;
    if (with_beta) {
      SpinorField theta_next = theta_of(next);
      inhomogeneous_dirac_step(beta, alpha, next, theta, theta_next, tr.dt, sym);
      beta.t = next.t;
      theta = std::move(theta_next);
    }
    alpha = std::move(next);
    if (!alpha.finite() || std::max(alpha.sup(0), alpha.sup(1)) > 1e3 * sup0) {
      tr.blow_up = true;
      fail(ErrorCode::blow_up, "envelope solution blew up at t = " + std::to_string(alpha.t));
    }
    if ((k + 1) % stride == 0) record();
  }
  return tr;
}

struct StudyRow {
  double kappa = 0.0;
  int order = 0;
  double eps = 0.0;
  double error = 0.0;           // max_t ||Psi(t) - Psi_app(t)||_{H^s_eps}
  double relative_error = 0.0;  // error / max_t ||Psi_app(t)||_{H^s_eps}
  double error_t0 = 0.0;        // preparation mismatch at t = 0
  double dropped = 0.0;         // L2 weight of profile modes beyond the fine grid band
  double nls_mass_drift = 0.0;
  double nls_dt = 0.0;
  long nls_steps = 0;
  double wall_seconds = 0.0;
  bool ok = false;
  std::string reason;
};

struct SlopeFit {
  double kappa = 0.0;
  int order = 0;
  std::vector<double> eps, error;
  double slope = NAN;          // least squares in log-log
  double constant = NAN;       // C in error ~ C eps^slope
  std::vector<double> pairwise;  // log2(e(eps)/e(eps/2)) between neighbours
  double slope_without_largest = NAN;
  bool pass = false;
};

struct ConvergenceReport {
  std::vector<StudyRow> rows;
  std::vector<SlopeFit> fits;
  double envelope_edge_mass = 0.0;
  double fredholm_max = 0.0;
  double envelope_mass_drift = 0.0;
  std::vector<std::string> notes;
  bool pass = false;
};

inline void least_squares_slope(const std::vector<double>& x, const std::vector<double>& y, double& slope, double& icpt) {
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  icpt = (sy - slope * sx) / n;
}

inline SlopeFit fit_slope(double kappa, int order, const std::vector<StudyRow>& rows, const AcceptanceBands& bands) {
  SlopeFit f;
  f.kappa = kappa;
  f.order = order;
  for (const auto& r : rows)
    if (r.kappa == kappa && r.order == order && r.ok && r.error > 0) {
      f.eps.push_back(r.eps);
      f.error.push_back(r.error);
    }
  if (f.eps.size() < 2) return f;
  double icpt = 0.0;
  least_squares_slope(f.eps, f.error, f.slope, icpt);
  f.constant = std::exp(icpt);
  for (std::size_t i = 0; i + 1 < f.eps.size(); ++i)
    f.pairwise.push_back(std::log(f.error[i] / f.error[i + 1]) / std::log(f.eps[i] / f.eps[i + 1]));
  if (f.eps.size() >= 3) {
    double c = 0.0;
    least_squares_slope({f.eps.begin() + 1, f.eps.end()}, {f.error.begin() + 1, f.error.end()}, f.slope_without_largest, c);
  }
  f.pass = order == 0 ? (f.slope >= bands.order0_slope_min && f.slope <= bands.order0_slope_max)
                      : f.slope >= bands.order1_slope_min;
  return f;
}

inline CommensurateGrid study_grid(const SimConfig& c, const LatticeGeometry& g, double eps) {
  const double ratio = c.eps_ladder.front() / eps;
  const int r = int(std::lround(ratio));
  require(r >= 1 && std::abs(ratio - r) < 1e-9, ErrorCode::non_commensurate_grid,
          "eps must divide the largest ladder entry");
  return build_commensurate_grid(g, eps, c.grid.cells_x * r, c.grid.cells_y * r, c.grid.ppc_x, c.grid.ppc_y);
}

using StudyProgress = std::function<void(const StudyRow&)>;

inline ConvergenceReport run_convergence_study(const StudySetup& s, const StudyProgress& progress = {}) {
  const SimConfig& c = s.config;
  ConvergenceReport rep;
  const SpinorField alpha0 = initial_envelope(c, s.coarse);
  bool need_beta = false;
  for (int o : c.orders) need_beta = need_beta || o == 1;

  std::vector<EnvelopeTrajectory> env;
  for (double kappa : c.kappas) {
    env.push_back(solve_envelopes(alpha0, study_symbol(s, kappa), s.pb, c.T, c.dirac_dt, c.snapshots, need_beta,
                                  c.fredholm_tol));
    rep.envelope_edge_mass = std::max(rep.envelope_edge_mass, env.back().edge_mass);
    rep.fredholm_max = std::max(rep.fredholm_max, env.back().fredholm_max);
    rep.envelope_mass_drift = std::max(rep.envelope_mass_drift, env.back().mass_drift);
  }
  if (rep.envelope_edge_mass > 1e-8)
  {
    char buf[160];
    std::snprintf(buf, sizeof buf, "envelope mass near the box edge reached %.2e (wrap-around is periodic and shared by both solutions)",
                  rep.envelope_edge_mass);
    rep.notes.push_back(buf);
  }

  const int s_norm = c.sobolev_s;
  for (double eps : c.eps_ladder) {
    const auto t_eps = std::chrono::steady_clock::now();
    std::unique_ptr<NlsLinearPropagator> lin;
    CommensurateGrid fine;
    std::string setup_error;
    try {
      fine = study_grid(c, s.V.geom, eps);
      lin = std::make_unique<NlsLinearPropagator>(s.V, fine, NlsLinearScheme::exact_blocks);
    } catch (const std::exception& e) {
      setup_error = e.what();
    }
    const double setup_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_eps).count();
    for (std::size_t ik = 0; ik < c.kappas.size(); ++ik)
      for (int order : c.orders) {
        StudyRow row;
        row.kappa = c.kappas[ik];
        row.order = order;
        row.eps = eps;
        const auto t0 = std::chrono::steady_clock::now();
        try {
          if (!setup_error.empty()) fail(ErrorCode::solver_failure, setup_error);
          const auto& samples = env[ik].samples;
          const WkbOrder wo = order == 0 ? WkbOrder::zero : WkbOrder::one;
          auto approx = [&](std::size_t k, PlacementStats* st) {
            const auto& sm = samples[k];
            return assemble_wkb_spectrum(sm.alpha, &sm.beta, &sm.cd, s.dp, &s.pb, fine, wo, st);
          };
          PlacementStats st;
          const ComplexField psi0 = fft_backward(approx(0, &st));
          row.dropped = st.dropped;
          NlsRunOptions o;
          o.T = c.T;
          o.dt = eps / c.nls_dt_divisor;
          o.kappa = row.kappa;
          o.snapshots = c.snapshots;
          o.sobolev = s_norm;
          double app_max = 0.0;
          std::size_t k = 0;
          const auto tr = solve_nls(psi0, *lin, o, [&](double t, const ComplexField& psi) {
            require(k < samples.size() && std::abs(samples[k].alpha.t - t) <= 1e-9, ErrorCode::time_grid_mismatch,
                    "NLS output times do not match the envelope samples");
            ComplexField diff = fft_forward(psi);
            const ComplexField app = approx(k, nullptr);
            diff -= app;
            const double e = scaled_sobolev_norm_from_spectrum(diff, fine, s_norm, eps);
            if (k == 0) row.error_t0 = e;
            row.error = std::max(row.error, e);
            app_max = std::max(app_max, scaled_sobolev_norm_from_spectrum(app, fine, s_norm, eps));
            ++k;
          });
          if (tr.blow_up) fail(ErrorCode::blow_up, "NLS solution blew up");
          row.nls_dt = tr.dt;
          row.nls_steps = tr.steps;
          const double m0 = tr.observables.front().mass;
          for (const auto& ob : tr.observables) row.nls_mass_drift = std::max(row.nls_mass_drift, std::abs(ob.mass - m0) / m0);
          row.relative_error = row.error / std::max(app_max, 1e-300);
          row.ok = true;
        } catch (const std::exception& e) {
          row.ok = false;
          row.reason = e.what();
        }
        row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() +
                           setup_seconds / double(c.kappas.size() * c.orders.size());
        if (progress) progress(row);
        rep.rows.push_back(row);
      }
  }
  rep.pass = true;
  for (double kappa : c.kappas)
    for (int order : c.orders) {
      rep.fits.push_back(fit_slope(kappa, order, rep.rows, c.bands));
      rep.pass = rep.pass && rep.fits.back().pass;
    }
  return rep;
}

}  // namespace honeydirac
