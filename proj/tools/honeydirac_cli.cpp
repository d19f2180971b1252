#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "honeydirac/report.hpp"

using namespace honeydirac;

namespace {

struct Overrides {
  std::string config;
  std::string out;
  std::optional<double> V0, T, kappa, nls_dt_divisor, dirac_dt;
  std::optional<int> M, order, sobolev, snapshots;
  std::optional<std::uint64_t> seed;
  std::vector<double> eps;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("-c,--config", o.config, "JSON configuration file")->check(CLI::ExistingFile);
  sub->add_option("-o,--out", o.out, "output directory (overrides output_dir)");
  sub->add_option("--V0", o.V0, "standard potential strength");
  sub->add_option("--M", o.M, "plane-wave cutoff");
  sub->add_option("--T", o.T, "final time");
  sub->add_option("--kappa", o.kappa, "single nonlinearity strength (replaces kappas)");
  sub->add_option("--eps", o.eps, "epsilon ladder (replaces eps_ladder)");
  sub->add_option("--order", o.order, "single preparation order (replaces orders)");
  sub->add_option("--sobolev", o.sobolev, "Sobolev index s");
  sub->add_option("--snapshots", o.snapshots, "number of output intervals");
  sub->add_option("--nls-dt-divisor", o.nls_dt_divisor, "NLS step is eps / divisor");
  sub->add_option("--dirac-dt", o.dirac_dt, "Dirac solver time step");
  sub->add_option("--seed", o.seed, "random seed for randomized envelopes");
}

SimConfig load(const Overrides& o) {
  SimConfig c = o.config.empty() ? SimConfig{} : parse_config(o.config);
  if (o.V0) {
    c.potential.type = "standard";
    c.potential.V0 = *o.V0;
  }
  if (o.M) c.M = *o.M;
  if (o.T) c.T = *o.T;
  if (o.kappa) c.kappas = {*o.kappa};
  if (!o.eps.empty()) c.eps_ladder = o.eps;
  if (o.order) c.orders = {*o.order};
  if (o.sobolev) c.sobolev_s = *o.sobolev;
  if (o.snapshots) c.snapshots = *o.snapshots;
  if (o.nls_dt_divisor) c.nls_dt_divisor = *o.nls_dt_divisor;
  if (o.dirac_dt) c.dirac_dt = *o.dirac_dt;
  if (o.seed) c.seed = *o.seed;
  if (!o.out.empty()) c.output_dir = o.out;
  validate(c);
  return c;
}

DiracPointData dirac_point(const SimConfig& c, const FourierPotential& V) {
  DiracOptions opt;
  opt.M = c.M;
  opt.bandPair = c.band_pair;
  opt.tolDegeneracy = c.degeneracy_tol;
  return locate_dirac_point(V, opt);
}

void finish(const Results& r, const SimConfig& c, const std::string& command,
            const std::vector<std::string>& extra = {}) {
  const auto files = emit_reports(r, c.output_dir, c, command, extra);
  std::printf("wrote manifest.json");
  for (const auto& f : files) std::printf(", %s", f.c_str());
  std::printf(" to %s\n", c.output_dir.c_str());
}

void write_field(const fs::path& path, const ComplexField& f, const RectGrid& g, double t, double eps,
                 const std::string& name) {
  Snapshot s;
  s.components = {name};
  s.fields = {f};
  s.L1 = g.L1;
  s.L2 = g.L2;
  s.t = t;
  s.eps = eps;
  write_snapshot(path, s);
}

// Initial NLS data at the first configured order and the first ladder eps.
struct Prepared {
  CommensurateGrid fine;
  ComplexField psi0;
  double dropped = 0.0;
};

Prepared prepare(const StudySetup& s, double eps, double kappa, int order) {
  const SimConfig& c = s.config;
  Prepared p;
  p.fine = study_grid(c, s.V.geom, eps);
  const SpinorField alpha = initial_envelope(c, s.coarse);
  const SpinorField beta(alpha.grid, alpha.t);
  const SpinorField da = alpha_time_derivative(alpha, study_symbol(s, kappa));
  const CorrectorData cd = build_u1_perp(alpha, s.pb, kappa, &da, c.fredholm_tol);
  PlacementStats st;
  p.psi0 = assemble_wkb_field(alpha, &beta, &cd, s.dp, &s.pb, p.fine, order == 0 ? WkbOrder::zero : WkbOrder::one, &st);
  p.dropped = st.dropped;
  return p;
}

int cmd_bands(const SimConfig& c, int points, int nbands) {
  const auto V = build_potential(c);
  Results r;
  const auto path = default_path(V.geom, points);
  r.bands = BandReport{path, band_structure(V, path, c.M, nbands)};
  finish(r, c, "bands");
  return 0;
}

int cmd_dirac_point(const SimConfig& c, bool cone) {
  const auto V = build_potential(c);
  DiracPointReport d{dirac_point(c, V), {}, std::nullopt};
  d.lambda = compute_lambda_sharp(d.dp, V.geom);
  if (cone) {
    const double q = V.geom.q;
    d.cone = verify_cone(V, d.dp, {2e-3 * q, 1e-3 * q, 5e-4 * q, 2.5e-4 * q});
  }
  std::printf("mu* = %.15g  |lambda#| = %.15g  gap = %.3e  bands (%d, %d)\n", d.dp.mustar, std::abs(d.dp.lambdaSharp),
              d.dp.gap, d.dp.bandPair, d.dp.bandPair + 1);
  Results r;
  r.dirac_point = d;
  finish(r, c, "dirac-point");
  return 0;
}

int cmd_coeffs(const SimConfig& c) {
  const auto V = build_potential(c);
  Results r;
  r.coeffs = coupling_tensor(dirac_point(c, V));
  std::printf("b1 = %.15g  b2 = %.15g\n", r.coeffs->b1, r.coeffs->b2);
  finish(r, c, "coeffs");
  return 0;
}

int cmd_solve_dirac(const SimConfig& c) {
  const StudySetup s = prepare_study(c);
  const SpinorField alpha0 = initial_envelope(c, s.coarse);
  DiracRunOptions o;
  o.T = c.T;
  o.dt = c.dirac_dt;
  o.snapshots = c.snapshots;
  const DiracSymbol sym = study_symbol(s, c.kappas.front());
  const auto tr = solve_nonlinear_dirac(alpha0, sym, o);
  fs::create_directories(c.output_dir);
  Snapshot snap;
  snap.components = {"alpha1", "alpha2"};
  const SpinorField& last = tr.snapshots.back();
  snap.fields = {last.alpha1, last.alpha2};
  snap.L1 = s.coarse.L1;
  snap.L2 = s.coarse.L2;
  snap.t = last.t;
  write_snapshot(fs::path(c.output_dir) / "alpha_final.bin", snap);
  Results r;
  r.dirac_observables = tr.observables;
  finish(r, c, "solve-dirac", {"alpha_final.bin", "alpha_final.bin.json"});
  const auto ex = local_existence_time(alpha0, std::max(c.sobolev_s, 2), sym);
  std::printf("contraction time T = %.6g (R = %.6g, C_s = %g)%s\n", ex.T, ex.R, ex.Cs,
              tr.blow_up ? "  blow-up detected" : "");
  return tr.blow_up ? 1 : 0;
}

int cmd_prepare_data(const SimConfig& c) {
  const StudySetup s = prepare_study(c);
  const double eps = c.eps_ladder.front();
  const Prepared p = prepare(s, eps, c.kappas.front(), c.orders.front());
  fs::create_directories(c.output_dir);
  write_field(fs::path(c.output_dir) / "psi0.bin", p.psi0, p.fine, 0.0, eps, "psi");
  std::printf("grid %zu x %zu, dropped weight %.3e\n", p.fine.nx, p.fine.ny, p.dropped);
  finish(Results{}, c, "prepare-data", {"psi0.bin", "psi0.bin.json"});
  return 0;
}

int cmd_solve_nls(const SimConfig& c) {
  const StudySetup s = prepare_study(c);
  const double eps = c.eps_ladder.front();
  const Prepared p = prepare(s, eps, c.kappas.front(), c.orders.front());
  NlsLinearPropagator lin(s.V, p.fine, NlsLinearScheme::exact_blocks);
  NlsRunOptions o;
  o.T = c.T;
  o.dt = eps / c.nls_dt_divisor;
  o.kappa = c.kappas.front();
  o.snapshots = c.snapshots;
  o.sobolev = c.sobolev_s;
  ComplexField last;
  double t_last = 0.0;
  const auto tr = solve_nls(p.psi0, lin, o, [&](double t, const ComplexField& psi) {
    last = psi;
    t_last = t;
  });
  fs::create_directories(c.output_dir);
  write_field(fs::path(c.output_dir) / "psi_final.bin", last, p.fine, t_last, eps, "psi");
  Results r;
  r.nls_observables = tr.observables;
  finish(r, c, "solve-nls", {"psi_final.bin", "psi_final.bin.json"});
  return tr.blow_up ? 1 : 0;
}

int cmd_converge(const SimConfig& c) {
  const StudySetup s = prepare_study(c);
  std::printf("mu* = %.12g  |lambda#| = %.12g  b1 = %.12g  b2 = %.12g\n", s.dp.mustar, std::abs(s.dp.lambdaSharp),
              s.ec.b1, s.ec.b2);
  Results r;
  r.convergence = run_convergence_study(s, [](const StudyRow& row) {
    std::printf("kappa %+g order %d eps %.6g: error %.6e (relative %.3e) %s%s\n", row.kappa, row.order, row.eps,
                row.error, row.relative_error, row.ok ? "" : "FAILED ", row.reason.c_str());
    std::fflush(stdout);
  });
  for (const auto& f : r.convergence->fits)
    std::printf("kappa %+g order %d: slope %.4f constant %.4g %s\n", f.kappa, f.order, f.slope, f.constant,
                f.pass ? "PASS" : "FAIL");
  for (const auto& n : r.convergence->notes) std::printf("note: %s\n", n.c_str());
  finish(r, c, "converge");
  return r.convergence->pass ? 0 : 1;
}

int cmd_hartree(const SimConfig& c) {
  const auto V = build_potential(c);
  const auto dp = dirac_point(c, V);
  const double e0 = c.hartree_ladder.front();
  const auto base = build_commensurate_grid(V.geom, e0, c.hartree_cells[0], c.hartree_cells[1], 8, 8);
  const RectGrid coarse{base.L1, base.L2, std::size_t(c.grid.coarse_nx), std::size_t(c.grid.coarse_ny)};
  const SpinorField alpha = initial_envelope(c, coarse);
  Results r;
  r.hartree = hartree_limit_check(alpha, dp, V.geom, c.hartree_ladder, c.hartree_cells[0], c.hartree_cells[1], {8, 8});
  bool ok = true;
  const auto& rows = *r.hartree;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::printf("eps %.6g: total %.4e diag %.4e cross %.4e limit %.4e\n", rows[i].eps, rows[i].total_deviation,
                rows[i].diag_deviation, rows[i].cross_sup, rows[i].limit_sup);
    if (i > 0) ok = ok && rows[i].cross_sup < rows[i - 1].cross_sup;
  }
  ok = ok && rows.back().cross_sup < 0.05 * rows.back().limit_sup;
  finish(r, c, "hartree-check");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Honeycomb Dirac-point wave packets: band structure, effective Dirac dynamics and NLS validation"};
  app.require_subcommand(1);
  Overrides o;
  int points = 40, nbands = 8;
  bool cone = true;

  auto* bands = app.add_subcommand("bands", "band structure along G-K-M-G-Kp");
  bands->add_option("--points", points, "samples per path segment");
  bands->add_option("--nbands", nbands, "number of bands");
  auto* dp = app.add_subcommand("dirac-point", "locate the Dirac point and its Bloch pair");
  dp->add_flag("!--no-cone", cone, "skip the cone-slope fit");
  auto* coeffs = app.add_subcommand("coeffs", "cubic coupling tensor b1, b2");
  auto* dirac = app.add_subcommand("solve-dirac", "evolve the envelope Dirac system");
  auto* nls = app.add_subcommand("solve-nls", "evolve the NLS from prepared data at the first eps");
  auto* prep = app.add_subcommand("prepare-data", "write the prepared NLS initial field");
  auto* conv = app.add_subcommand("converge", "run the convergence study");
  auto* hart = app.add_subcommand("hartree-check", "Hartree averaging along the Hartree eps ladder");
  for (auto* s : {bands, dp, coeffs, dirac, nls, prep, conv, hart}) add_common(s, o);

  CLI11_PARSE(app, argc, argv);
  try {
    const SimConfig c = load(o);
    if (*bands) return cmd_bands(c, points, nbands);
    if (*dp) return cmd_dirac_point(c, cone);
    if (*coeffs) return cmd_coeffs(c);
    if (*dirac) return cmd_solve_dirac(c);
    if (*nls) return cmd_solve_nls(c);
    if (*prep) return cmd_prepare_data(c);
    if (*conv) return cmd_converge(c);
    if (*hart) return cmd_hartree(c);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
