#pragma once

#include <optional>
#include <string>
#include <vector>

#include "honeydirac/bloch.hpp"
#include "honeydirac/config.hpp"
#include "honeydirac/dirac2d.hpp"
#include "honeydirac/effcoef.hpp"
#include "honeydirac/io.hpp"
#include "honeydirac/nls.hpp"
#include "honeydirac/study.hpp"

namespace honeydirac {

struct BandReport {
  std::vector<PathPoint> path;
  std::vector<BandRow> rows;
};

struct DiracPointReport {
  DiracPointData dp;
  LambdaReport lambda;
  std::optional<ConeFitReport> cone;
};

struct Results {
  std::optional<BandReport> bands;
  std::optional<DiracPointReport> dirac_point;
  std::optional<EffectiveCoefficients> coeffs;
  std::optional<ConvergenceReport> convergence;
  std::optional<std::vector<HartreeRow>> hartree;
  std::optional<std::vector<DiracObservables>> dirac_observables;
  std::optional<std::vector<NlsObservables>> nls_observables;
};

// CSV headers, in emission order; the README documents the same columns.
inline const std::vector<std::string>& convergence_header() {
  static const std::vector<std::string> h{"kappa", "order", "eps", "error", "relative_error", "error_t0", "dropped",
                                          "nls_mass_drift", "nls_dt", "nls_steps", "wall_seconds", "ok", "reason"};
  return h;
}

inline const std::vector<std::string>& hartree_header() {
  static const std::vector<std::string> h{"eps", "total_deviation", "diag_deviation", "cross_sup", "limit_sup"};
  return h;
}

inline nlohmann::ordered_json cplx_json(cplx z) { return {z.real(), z.imag()}; }

inline nlohmann::ordered_json dirac_point_json(const DiracPointReport& r) {
  const DiracPointData& dp = r.dp;
  nlohmann::ordered_json j{{"anchor", dp.anchor == Anchor::K ? "K" : dp.anchor == Anchor::Kprime ? "Kprime" : "origin"},
                           {"Kstar", {dp.Kstar.x(), dp.Kstar.y()}},
                           {"M", dp.M},
                           {"basis_size", dp.basis->size()},
                           {"band_pair", {dp.bandPair, dp.bandPair + 1}},
                           {"mu_star", dp.mustar},
                           {"gap", dp.gap},
                           {"rotation_eigenvalues", {cplx_json(dp.rotationEigs[0]), cplx_json(dp.rotationEigs[1])}},
                           {"commutator", dp.commutator},
                           {"rotation_residual", dp.rotationResidual},
                           {"phi2_relation_error", dp.phi2RelationError},
                           {"gauge", {{"anchor_index", {dp.gauge.index.m1, dp.gauge.index.m2}}, {"phase", dp.gauge.phase}}},
                           {"lambda_sharp", cplx_json(dp.lambdaSharp)},
                           {"lambda_abs", std::abs(dp.lambdaSharp)},
                           {"lambda_from_d2", cplx_json(r.lambda.lambda_y)},
                           {"lambda_fourier_sum", cplx_json(r.lambda.fourier_sum)},
                           {"lambda_relative_disagreement", r.lambda.relative_disagreement},
                           {"diagonal_gradient_max", r.lambda.diagonal_max},
                           {"lambda_assumption_ok", r.lambda.assumption_ok}};
  if (r.cone) {
    nlohmann::ordered_json radii = nlohmann::ordered_json::array();
    for (const auto& c : r.cone->radii)
      radii.push_back({{"r", c.r}, {"slope_plus", c.slope_plus}, {"slope_minus", c.slope_minus},
                       {"isotropy", c.isotropy}, {"max_E", c.max_E}});
    j["cone"] = {{"lambda_fit", r.cone->lambda_fit}, {"relative_to_lambda", r.cone->relative_to_lambda},
                 {"C", r.cone->C}, {"radii", radii}};
  }
  return j;
}

inline nlohmann::ordered_json coeffs_json(const EffectiveCoefficients& ec) {
  nlohmann::ordered_json tensor = nlohmann::ordered_json::array();
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l)
        for (int m = 0; m < 2; ++m)
          tensor.push_back({{"index", {j + 1, k + 1, l + 1, m + 1}}, {"value", cplx_json(ec(j, k, l, m))}});
  return {{"b1", ec.b1},
          {"b2", ec.b2},
          {"oversample", ec.oversample},
          {"torus_grid", ec.grid},
          {"forbidden_max", ec.forbidden_max},
          {"equality_max", ec.equality_max},
          {"refinement_change", ec.refinement_change},
          {"tensor", tensor}};
}

// Writes every populated result plus manifest.json; returns the file names.
// Files already written into dir by the caller can be listed in extra.
inline std::vector<std::string> emit_reports(const Results& res, const fs::path& dir, const SimConfig& cfg,
                                             const std::string& command, const std::vector<std::string>& extra = {}) {
  fs::create_directories(dir);
  std::vector<std::string> files;
  if (res.bands) {
    std::vector<std::string> h{"k1", "k2", "arclength", "label"};
    const long nb = res.bands->rows.empty() ? 0 : res.bands->rows.front().mu.size();
    for (long b = 0; b < nb; ++b) h.push_back("mu" + std::to_string(b));
    CsvWriter w(dir / "bands.csv", h);
    for (std::size_t i = 0; i < res.bands->rows.size(); ++i) {
      const auto& r = res.bands->rows[i];
      std::vector<std::string> cells{format_double(r.k.x()), format_double(r.k.y()), format_double(r.arclength),
                                     i < res.bands->path.size() ? res.bands->path[i].label : ""};
      for (long b = 0; b < r.mu.size(); ++b) cells.push_back(format_double(r.mu(b)));
      w.row_strings(cells);
    }
    files.push_back("bands.csv");
  }
  if (res.dirac_point) {
    write_json(dir / "dirac_point.json", dirac_point_json(*res.dirac_point));
    files.push_back("dirac_point.json");
  }
  if (res.coeffs) {
    write_json(dir / "coeffs.json", coeffs_json(*res.coeffs));
    files.push_back("coeffs.json");
  }
  if (res.convergence) {
    {
      CsvWriter w(dir / "convergence.csv", convergence_header());
      for (const auto& r : res.convergence->rows)
        w.row(r.kappa, r.order, r.eps, r.error, r.relative_error, r.error_t0, r.dropped, r.nls_mass_drift, r.nls_dt,
              r.nls_steps, r.wall_seconds, r.ok, r.reason);
    }
    {
      CsvWriter w(dir / "convergence_fits.csv",
                  {"kappa", "order", "points", "slope", "constant", "slope_without_largest", "pairwise", "pass"});
      for (const auto& f : res.convergence->fits) {
        std::string pw;
        for (std::size_t i = 0; i < f.pairwise.size(); ++i) pw += (i ? ";" : "") + format_double(f.pairwise[i]);
        w.row(f.kappa, f.order, f.eps.size(), f.slope, f.constant, f.slope_without_largest, pw, f.pass);
      }
    }
    files.push_back("convergence.csv");
    files.push_back("convergence_fits.csv");
  }
  if (res.hartree) {
    CsvWriter w(dir / "hartree.csv", hartree_header());
    for (const auto& r : *res.hartree) w.row(r.eps, r.total_deviation, r.diag_deviation, r.cross_sup, r.limit_sup);
    files.push_back("hartree.csv");
  }
  if (res.dirac_observables) {
    CsvWriter w(dir / "observables.csv", {"t", "mass", "energy", "sup_alpha1", "sup_alpha2"});
    for (const auto& o : *res.dirac_observables) w.row(o.t, o.mass, o.energy, o.sup1, o.sup2);
    files.push_back("observables.csv");
  } else if (res.nls_observables) {
    CsvWriter w(dir / "observables.csv", {"t", "mass", "sup_psi", "hs_norm"});
    for (const auto& o : *res.nls_observables) w.row(o.t, o.mass, o.sup, o.hs_norm);
    files.push_back("observables.csv");
  }
  std::vector<std::string> listed = files;
  listed.insert(listed.end(), extra.begin(), extra.end());
  write_manifest(dir, to_json(cfg), config_hash(cfg), command, listed);
  return listed;
}

}  // namespace honeydirac
