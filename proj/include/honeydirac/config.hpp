#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "honeydirac/dirac2d.hpp"
#include "honeydirac/error.hpp"
#include "honeydirac/potential.hpp"

namespace honeydirac {

using json = nlohmann::ordered_json;

struct PotentialSpec {
  std::string type = "standard";  // "standard" or "coefficients"
  double V0 = 1.0;
  std::vector<std::array<double, 4>> coefficients;  // m1, m2, re, im
};

struct GridSpec {
  int cells_x = 28;  // rectangular cells along x1 at the largest eps
  int cells_y = 48;  // along x2; divisible by 3
  int ppc_x = 12;
  int ppc_y = 8;
  int coarse_nx = 64;  // envelope grid over the same box
  int coarse_ny = 64;
};

struct EnvelopeSpec {
  GaussianEnvelope alpha1{0.0, 0.0, 1.0, 0.0, 0.0, cplx(1.0, 0.0)};
  GaussianEnvelope alpha2{0.0, 0.0, 1.0, 0.0, 0.0, cplx(0.0, 0.5)};
  double mass = 1.0;
  bool randomize = false;  // random centres, momenta and weights drawn from seed
};

struct AcceptanceBands {
  double order0_slope_min = 0.7;
  double order0_slope_max = 1.3;
  double order1_slope_min = 1.6;
};

struct SimConfig {
  double lattice_a = 1.0;
  PotentialSpec potential;
  int M = 12;
  int band_pair = -1;
  std::vector<double> eps_ladder{1.0 / 6, 1.0 / 12, 1.0 / 24};
  GridSpec grid;
  std::vector<double> kappas{1.0, -1.0};
  double T = 0.5;
  double dirac_dt = 1e-3;
  double nls_dt_divisor = 128.0;  // nls dt = eps / divisor
  std::vector<int> orders{0, 1};
  int sobolev_s = 2;
  int snapshots = 10;
  EnvelopeSpec envelope;
  AcceptanceBands bands;
  double degeneracy_tol = 1e-6;
  double fredholm_tol = 1e-9;
  std::vector<double> hartree_ladder{1.0 / 4, 1.0 / 8, 1.0 / 16};
  std::array<int, 2> hartree_cells{12, 24};  // rectangular cells at the first Hartree eps
  std::uint64_t seed = 0;
  std::string output_dir = "out";
};

namespace detail {

inline json envelope_to_json(const GaussianEnvelope& e) {
  return json{{"x1", e.x1}, {"x2", e.x2}, {"width", e.width}, {"p1", e.p1}, {"p2", e.p2},
              {"weight", {e.weight.real(), e.weight.imag()}}};
}

// Strict reader: every key must be known; missing keys keep their defaults.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(ErrorCode::config_error, path_ + ": expected an object");
  }
  ~Reader() = default;

  template <class T>
  void get(const char* key, T& out) {
    seen_.push_back(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::config_error, field(key) + ": " + e.what());
    }
  }

  const json* sub(const char* key) {
    seen_.push_back(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end())
        fail(ErrorCode::config_error, "unknown configuration key '" + (path_.empty() ? it.key() : path_ + "." + it.key()) + "'");
  }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string> seen_;
};

inline GaussianEnvelope envelope_from_json(const json& j, const std::string& path, GaussianEnvelope e) {
  Reader r(j, path);
  r.get("x1", e.x1);
  r.get("x2", e.x2);
  r.get("width", e.width);
  r.get("p1", e.p1);
  r.get("p2", e.p2);
  std::array<double, 2> w{e.weight.real(), e.weight.imag()};
  r.get("weight", w);
  e.weight = cplx(w[0], w[1]);
  r.finish();
  return e;
}

}  // namespace detail

inline json to_json(const SimConfig& c) {
  json pot{{"type", c.potential.type}, {"V0", c.potential.V0}, {"coefficients", c.potential.coefficients}};
  json grid{{"cells_x", c.grid.cells_x}, {"cells_y", c.grid.cells_y}, {"ppc_x", c.grid.ppc_x},
            {"ppc_y", c.grid.ppc_y}, {"coarse_nx", c.grid.coarse_nx}, {"coarse_ny", c.grid.coarse_ny}};
  json env{{"alpha1", detail::envelope_to_json(c.envelope.alpha1)},
           {"alpha2", detail::envelope_to_json(c.envelope.alpha2)},
           {"mass", c.envelope.mass},
           {"randomize", c.envelope.randomize}};
  json bands{{"order0_slope_min", c.bands.order0_slope_min},
             {"order0_slope_max", c.bands.order0_slope_max},
             {"order1_slope_min", c.bands.order1_slope_min}};
  return json{{"lattice_a", c.lattice_a},
              {"potential", pot},
              {"M", c.M},
              {"band_pair", c.band_pair},
              {"eps_ladder", c.eps_ladder},
              {"grid", grid},
              {"kappas", c.kappas},
              {"T", c.T},
              {"dirac_dt", c.dirac_dt},
              {"nls_dt_divisor", c.nls_dt_divisor},
              {"orders", c.orders},
              {"sobolev_s", c.sobolev_s},
              {"snapshots", c.snapshots},
              {"envelope", env},
              {"bands", bands},
              {"degeneracy_tol", c.degeneracy_tol},
              {"fredholm_tol", c.fredholm_tol},
              {"hartree_ladder", c.hartree_ladder},
              {"hartree_cells", c.hartree_cells},
              {"seed", c.seed},
              {"output_dir", c.output_dir}};
}

inline void validate(const SimConfig& c) {
  auto need = [](bool ok, const std::string& field, const std::string& what) {
    if (!ok) fail(ErrorCode::config_error, field + ": " + what);
  };
  need(c.lattice_a > 0, "lattice_a", "must be positive");
  need(c.potential.type == "standard" || c.potential.type == "coefficients", "potential.type",
       "must be 'standard' or 'coefficients'");
  need(c.M >= 1, "M", "must be >= 1");
  need(!c.eps_ladder.empty(), "eps_ladder", "must not be empty");
  for (std::size_t i = 0; i < c.eps_ladder.size(); ++i) {
    need(c.eps_ladder[i] > 0 && c.eps_ladder[i] <= 1, "eps_ladder", "entries must lie in (0, 1]");
    if (i > 0) need(c.eps_ladder[i] < c.eps_ladder[i - 1], "eps_ladder", "must be strictly decreasing");
    const double r = c.eps_ladder[0] / c.eps_ladder[i];
    need(std::abs(r - std::round(r)) < 1e-9, "eps_ladder", "every entry must divide the first one");
  }
  need(c.grid.cells_x >= 1 && c.grid.cells_y >= 3, "grid", "cell counts must be positive");
  need(c.grid.cells_y % 3 == 0, "grid.cells_y", "must be divisible by 3");
  need(c.grid.ppc_x >= 8 && c.grid.ppc_y >= 8 && c.grid.ppc_x % 2 == 0 && c.grid.ppc_y % 2 == 0, "grid.ppc",
       "points per cell must be even and >= 8");
  need(c.grid.coarse_nx >= 4 && c.grid.coarse_ny >= 4, "grid.coarse", "envelope grid too small");
  need(!c.kappas.empty(), "kappas", "must not be empty");
  need(c.T > 0, "T", "must be positive");
  need(c.dirac_dt > 0, "dirac_dt", "must be positive");
  need(c.nls_dt_divisor >= 4, "nls_dt_divisor", "must be >= 4 (dt <= eps/4)");
  for (int o : c.orders) need(o == 0 || o == 1, "orders", "preparation order must be 0 or 1");
  need(c.sobolev_s >= 0, "sobolev_s", "must be a nonnegative integer");
  need(c.snapshots >= 1, "snapshots", "must be >= 1");
  need(c.envelope.mass > 0 && c.envelope.alpha1.width > 0 && c.envelope.alpha2.width > 0, "envelope",
       "mass and widths must be positive");
  need(c.bands.order0_slope_min < c.bands.order0_slope_max, "bands", "empty order-0 band");
  need(c.degeneracy_tol > 0 && c.fredholm_tol > 0, "tolerances", "must be positive");
  for (std::size_t i = 1; i < c.hartree_ladder.size(); ++i)
    need(c.hartree_ladder[i] < c.hartree_ladder[i - 1], "hartree_ladder", "must be strictly decreasing");
  need(c.hartree_cells[0] >= 1 && c.hartree_cells[1] >= 3 && c.hartree_cells[1] % 3 == 0, "hartree_cells",
       "need positive counts with the second divisible by 3");
}

inline SimConfig config_from_json(const json& j) {
  SimConfig c;
  detail::Reader r(j, "");
  r.get("lattice_a", c.lattice_a);
  if (const json* p = r.sub("potential")) {
    detail::Reader rp(*p, "potential");
    rp.get("type", c.potential.type);
    rp.get("V0", c.potential.V0);
    rp.get("coefficients", c.potential.coefficients);
    rp.finish();
  }
  r.get("M", c.M);
  r.get("band_pair", c.band_pair);
  r.get("eps_ladder", c.eps_ladder);
  if (const json* p = r.sub("grid")) {
    detail::Reader rg(*p, "grid");
    rg.get("cells_x", c.grid.cells_x);
    rg.get("cells_y", c.grid.cells_y);
    rg.get("ppc_x", c.grid.ppc_x);
    rg.get("ppc_y", c.grid.ppc_y);
    rg.get("coarse_nx", c.grid.coarse_nx);
    rg.get("coarse_ny", c.grid.coarse_ny);
    rg.finish();
  }
  r.get("kappas", c.kappas);
  r.get("T", c.T);
  r.get("dirac_dt", c.dirac_dt);
  r.get("nls_dt_divisor", c.nls_dt_divisor);
  r.get("orders", c.orders);
  r.get("sobolev_s", c.sobolev_s);
  r.get("snapshots", c.snapshots);
  if (const json* p = r.sub("envelope")) {
    detail::Reader re(*p, "envelope");
    if (const json* a = re.sub("alpha1")) c.envelope.alpha1 = detail::envelope_from_json(*a, "envelope.alpha1", c.envelope.alpha1);
    if (const json* a = re.sub("alpha2")) c.envelope.alpha2 = detail::envelope_from_json(*a, "envelope.alpha2", c.envelope.alpha2);
    re.get("mass", c.envelope.mass);
    re.get("randomize", c.envelope.randomize);
    re.finish();
  }
  if (const json* p = r.sub("bands")) {
    detail::Reader rb(*p, "bands");
    rb.get("order0_slope_min", c.bands.order0_slope_min);
    rb.get("order0_slope_max", c.bands.order0_slope_max);
    rb.get("order1_slope_min", c.bands.order1_slope_min);
    rb.finish();
  }
  r.get("degeneracy_tol", c.degeneracy_tol);
  r.get("fredholm_tol", c.fredholm_tol);
  r.get("hartree_ladder", c.hartree_ladder);
  r.get("hartree_cells", c.hartree_cells);
  r.get("seed", c.seed);
  r.get("output_dir", c.output_dir);
  r.finish();
  validate(c);
  return c;
}

inline SimConfig parse_config_string(const std::string& text) {
  std::string trimmed = text;
  trimmed.erase(0, trimmed.find_first_not_of(" \t\r\n"));
  if (trimmed.empty()) return config_from_json(json::object());
  json j;
  try {
    j = json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::config_error, std::string("malformed JSON: ") + e.what());
  }
  return config_from_json(j);
}

inline SimConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_error, "cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str());
}

inline FourierPotential build_potential(const SimConfig& c) {
  const LatticeGeometry g = build_lattice(c.lattice_a);
  if (c.potential.type == "standard") return standard_honeycomb_potential(g, c.potential.V0);
  std::vector<std::pair<DualIndex, cplx>> triples;
  for (const auto& t : c.potential.coefficients)
    triples.emplace_back(DualIndex{int(std::lround(t[0])), int(std::lround(t[1]))}, cplx(t[2], t[3]));
  return potential_from_triples(g, triples);
}

// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string config_hash(const SimConfig& c) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << fnv1a(to_json(c).dump());
  return os.str();
}

}  // namespace honeydirac
