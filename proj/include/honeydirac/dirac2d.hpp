#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

#include "honeydirac/error.hpp"
#include "honeydirac/fft.hpp"
#include "honeydirac/field.hpp"

namespace honeydirac {

// i d_t alpha = M(-i grad) alpha + kappa F(alpha) with
// M(xi) = [[0, conj(lambda)(xi1 + i xi2)], [lambda (xi1 - i xi2), 0]].
struct DiracSymbol {
  cplx lambda = 1.0;
  double kappa = 1.0;
  double b1 = 1.0, b2 = 1.0;

  cplx m12(double x1, double x2) const { return std::conj(lambda) * cplx(x1, x2); }
  cplx m21(double x1, double x2) const { return lambda * cplx(x1, -x2); }

  // Coupling tensor with the vanishing pattern imposed, indices 0 -> alpha1.
  double tensor(int j, int k, int l, int m) const {
    if (j == k && k == l && l == m) return b1;
    if (j != l && ((k == j && m == l) || (k == l && m == j))) return b2;
    return 0.0;
  }
};

// Effective wavenumbers: Nyquist slots are frozen (treated as xi = 0) so that
// the propagator, derivatives and energy use one consistent symbol.
inline double dirac_xi1(const RectGrid& g, std::size_t i) { return is_nyquist(i, g.nx) ? 0.0 : g.xi1(i); }
inline double dirac_xi2(const RectGrid& g, std::size_t j) { return is_nyquist(j, g.ny) ? 0.0 : g.xi2(j); }

// Applies exp(-i M(xi) dt) to a pair of spectra in place.
inline void dirac_propagate_spectra(ComplexField& s1, ComplexField& s2, const RectGrid& g, double dt,
                                    const DiracSymbol& sym) {
  const double lam = std::abs(sym.lambda);
  for (std::size_t i = 0; i < g.nx; ++i) {
    const double x1 = dirac_xi1(g, i);
    for (std::size_t j = 0; j < g.ny; ++j) {
      const double x2 = dirac_xi2(g, j);
      const double w = lam * std::hypot(x1, x2);
      if (w == 0.0) continue;
      const double c = std::cos(w * dt), sn = std::sin(w * dt) / w;
      const cplx a = s1(i, j), b = s2(i, j);
      s1(i, j) = c * a - cplx(0.0, sn) * sym.m12(x1, x2) * b;
      s2(i, j) = c * b - cplx(0.0, sn) * sym.m21(x1, x2) * a;
    }
  }
}

inline void linear_propagator_step(SpinorField& f, double dt, const DiracSymbol& sym) {
  ComplexField s1 = fft_forward(f.alpha1), s2 = fft_forward(f.alpha2);
  dirac_propagate_spectra(s1, s2, f.grid, dt, sym);
  fft_backward(s1, f.alpha1);
  fft_backward(s2, f.alpha2);
  f.t += dt;
}

// D alpha = M(-i grad) alpha evaluated spectrally.
inline SpinorField apply_dirac_operator(const SpinorField& f, const DiracSymbol& sym) {
  ComplexField s1 = fft_forward(f.alpha1), s2 = fft_forward(f.alpha2);
  ComplexField o1(f.grid.nx, f.grid.ny), o2(f.grid.nx, f.grid.ny);
  for (std::size_t i = 0; i < f.grid.nx; ++i) {
    const double x1 = dirac_xi1(f.grid, i);
    for (std::size_t j = 0; j < f.grid.ny; ++j) {
      const double x2 = dirac_xi2(f.grid, j);
      o1(i, j) = sym.m12(x1, x2) * s2(i, j);
      o2(i, j) = sym.m21(x1, x2) * s1(i, j);
    }
  }
  SpinorField out(f.grid, f.t);
  fft_backward(o1, out.alpha1);
  fft_backward(o2, out.alpha2);
  return out;
}

// Exact flow of i d_t alpha = kappa F(alpha): moduli are invariant, so the
// phases integrate in closed form.
inline void nonlinear_phase_step(SpinorField& f, double dt, const DiracSymbol& sym) {
  if (sym.kappa == 0.0) return;
  for (std::size_t k = 0; k < f.alpha1.size(); ++k) {
    const double n1 = std::norm(f.alpha1[k]), n2 = std::norm(f.alpha2[k]);
    f.alpha1[k] *= std::polar(1.0, -sym.kappa * (sym.b1 * n1 + 2.0 * sym.b2 * n2) * dt);
    f.alpha2[k] *= std::polar(1.0, -sym.kappa * (sym.b1 * n2 + 2.0 * sym.b2 * n1) * dt);
  }
}

// F_n(alpha) = sum_{jkl} kappa_{jkln} alpha_j conj(alpha_k) alpha_l / kappa.
inline SpinorField cubic_term(const SpinorField& f, const DiracSymbol& sym) {
  SpinorField out(f.grid, f.t);
  for (std::size_t k = 0; k < f.alpha1.size(); ++k) {
    const double n1 = std::norm(f.alpha1[k]), n2 = std::norm(f.alpha2[k]);
    out.alpha1[k] = (sym.b1 * n1 + 2.0 * sym.b2 * n2) * f.alpha1[k];
    out.alpha2[k] = (sym.b1 * n2 + 2.0 * sym.b2 * n1) * f.alpha2[k];
  }
  return out;
}

// d_t alpha = -i (D alpha + kappa F(alpha)).
inline SpinorField alpha_time_derivative(const SpinorField& f, const DiracSymbol& sym) {
  SpinorField d = apply_dirac_operator(f, sym);
  const SpinorField F = cubic_term(f, sym);
  for (int c = 0; c < 2; ++c)
    for (std::size_t k = 0; k < d[c].size(); ++k) d[c][k] = cplx(0.0, -1.0) * (d[c][k] + sym.kappa * F[c][k]);
  return d;
}

struct EnergyParts {
  double dirac = 0.0;    // Im(conj(lambda) int alpha2 (d1 + i d2) conj(alpha1))
  double quartic = 0.0;  // int b1 (|a1|^4 + |a2|^4) + 4 b2 |a1|^2 |a2|^2
  double total = 0.0;    // dirac - (kappa / 4) quartic
};

inline EnergyParts energy_functional(const SpinorField& f, const DiracSymbol& sym) {
  const RectGrid& g = f.grid;
  ComplexField c1(g.nx, g.ny);
  for (std::size_t k = 0; k < c1.size(); ++k) c1[k] = std::conj(f.alpha1[k]);
  const ComplexField d1 = spectral_derivative(c1, g, 0), d2 = spectral_derivative(c1, g, 1);
  cplx s = 0.0;
  double q = 0.0;
  for (std::size_t k = 0; k < c1.size(); ++k) {
    s += f.alpha2[k] * (d1[k] + cplx(0.0, 1.0) * d2[k]);
    const double n1 = std::norm(f.alpha1[k]), n2 = std::norm(f.alpha2[k]);
    q += sym.b1 * (n1 * n1 + n2 * n2) + 4.0 * sym.b2 * n1 * n2;
  }
  EnergyParts e;
  e.dirac = (std::conj(sym.lambda) * s * g.cell_volume()).imag();
  e.quartic = q * g.cell_volume();
  e.total = e.dirac - 0.25 * sym.kappa * e.quartic;
  return e;
}

struct DiracObservables {
  double t = 0.0, mass = 0.0, energy = 0.0, sup1 = 0.0, sup2 = 0.0;
};

struct DiracTrajectory {
  std::vector<SpinorField> snapshots;
  std::vector<DiracObservables> observables;
  bool blow_up = false;
  double blow_up_time = 0.0;
  double dt = 0.0;
  long steps = 0;
};

inline DiracObservables observe(const SpinorField& f, const DiracSymbol& sym) {
  return {f.t, f.mass(), energy_functional(f, sym).total, f.sup(0), f.sup(1)};
}

// Step count for horizon T at nominal step dt, rounded up so that the actual
// step T / n never exceeds dt and n is a multiple of `multiple`.
inline long step_count(double T, double dt, long multiple = 1) {
  require(T >= 0.0 && dt > 0.0, ErrorCode::invalid_parameter, "need T >= 0 and dt > 0");
  long n = long(std::ceil(T / dt * (1.0 - 1e-12)));
  n = std::max<long>(n, 1);
  if (n % multiple) n += multiple - n % multiple;
  return n;
}

struct DiracRunOptions {
  double T = 1.0;
  double dt = 1e-3;
  int snapshots = 10;           // number of output intervals
  bool keep_snapshots = true;
  double blow_up_factor = 1e3;  // abort when sup|alpha| exceeds this times its initial value
};

// Strang splitting N(dt/2) L(dt) N(dt/2); consecutive half phase steps merge
// exactly because the phase flow is exact.
inline DiracTrajectory solve_nonlinear_dirac(const SpinorField& alpha0, const DiracSymbol& sym,
                                             const DiracRunOptions& opt,
                                             const std::function<void(const SpinorField&)>& on_snapshot = {}) {
  require(opt.snapshots >= 1, ErrorCode::invalid_parameter, "need at least one output interval");
  const long n = step_count(opt.T, opt.dt, opt.snapshots);
  const double dt = opt.T / double(n);
  const long stride = n / opt.snapshots;
  DiracTrajectory tr;
  tr.dt = dt;
  tr.steps = n;
  SpinorField f = alpha0;
  const double sup0 = std::max({f.sup(0), f.sup(1), 1e-300});
  auto emit = [&]() {
    tr.observables.push_back(observe(f, sym));
    if (opt.keep_snapshots) tr.snapshots.push_back(f);
    if (on_snapshot) on_snapshot(f);
  };
  emit();
  const double t0 = f.t;
  for (long s = 0; s < n; s += stride) {
    nonlinear_phase_step(f, 0.5 * dt, sym);
    for (long k = 0; k < stride; ++k) {
      linear_propagator_step(f, dt, sym);
      nonlinear_phase_step(f, k + 1 < stride ? dt : 0.5 * dt, sym);
    }
    f.t = t0 + double(s + stride) * dt;
    if (!f.finite() || std::max(f.sup(0), f.sup(1)) > opt.blow_up_factor * sup0) {
      tr.blow_up = true;
      tr.blow_up_time = f.t;
      break;
    }
    emit();
  }
  return tr;
}

// One Strang step on the uniform grid (used for self-convergence studies).
inline void dirac_strang_step(SpinorField& f, double dt, const DiracSymbol& sym) {
  nonlinear_phase_step(f, 0.5 * dt, sym);
  linear_propagator_step(f, dt, sym);
  nonlinear_phase_step(f, 0.5 * dt, sym);
}

// kappa sum_{jkl} T_{jkln} (alpha_j conj(beta_k) alpha_l + 2 beta_j conj(alpha_k) alpha_l)
inline std::array<cplx, 2> linearized_coupling(const std::array<cplx, 2>& a, const std::array<cplx, 2>& b,
                                               const DiracSymbol& sym) {
  std::array<cplx, 2> out{0.0, 0.0};
  for (int n = 0; n < 2; ++n)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
          const double T = sym.tensor(j, k, l, n);
          if (T == 0.0) continue;
          out[n] += T * (a[j] * std::conj(b[k]) * a[l] + 2.0 * b[j] * std::conj(a[k]) * a[l]);
        }
  out[0] *= sym.kappa;
  out[1] *= sym.kappa;
  return out;
}

namespace detail {
// beta += h * (-i C(alpha, beta0) + i Theta), pointwise.
inline void coupling_increment(SpinorField& out, const SpinorField& beta0, const SpinorField& alpha,
                               const SpinorField& theta, const DiracSymbol& sym, double h) {
  const cplx I(0.0, 1.0);
  for (std::size_t k = 0; k < beta0.alpha1.size(); ++k) {
    const auto C = linearized_coupling({alpha.alpha1[k], alpha.alpha2[k]}, {beta0.alpha1[k], beta0.alpha2[k]}, sym);
    out.alpha1[k] += h * (-I * C[0] + I * theta.alpha1[k]);
    out.alpha2[k] += h * (-I * C[1] + I * theta.alpha2[k]);
  }
}

inline SpinorField lerp(const SpinorField& a, const SpinorField& b, double w) {
  SpinorField out(a.grid, (1.0 - w) * a.t + w * b.t);
  for (int c = 0; c < 2; ++c)
    for (std::size_t k = 0; k < a[c].size(); ++k) out[c][k] = (1.0 - w) * a[c][k] + w * b[c][k];
  return out;
}
}  // namespace detail

// One step of d_t beta + i D beta + i kappa C(alpha, beta) = i Theta: exact
// linear half steps around an explicit midpoint step for coupling + source,
// with alpha and Theta at the midpoint interpolated linearly.
inline void inhomogeneous_dirac_step(SpinorField& beta, const SpinorField& a0, const SpinorField& a1,
                                     const SpinorField& th0, const SpinorField& th1, double dt, const DiracSymbol& sym) {
  const double t0 = beta.t;
  ComplexField s1 = fft_forward(beta.alpha1), s2 = fft_forward(beta.alpha2);
  dirac_propagate_spectra(s1, s2, beta.grid, 0.5 * dt, sym);
  fft_backward(s1, beta.alpha1);
  fft_backward(s2, beta.alpha2);

  SpinorField half = beta;
  detail::coupling_increment(half, beta, a0, th0, sym, 0.5 * dt);
  const SpinorField am = detail::lerp(a0, a1, 0.5), tm = detail::lerp(th0, th1, 0.5);
  detail::coupling_increment(beta, half, am, tm, sym, dt);

  s1 = fft_forward(beta.alpha1);
  s2 = fft_forward(beta.alpha2);
  dirac_propagate_spectra(s1, s2, beta.grid, 0.5 * dt, sym);
  fft_backward(s1, beta.alpha1);
  fft_backward(s2, beta.alpha2);
  beta.t = t0 + dt;
}

// Integrates the inhomogeneous system given alpha and Theta sampled at
// t_n = t0 + n dt, n = 0..N; returns beta at the same times.
inline std::vector<SpinorField> solve_inhomogeneous_dirac(const SpinorField& beta0,
                                                          const std::vector<SpinorField>& alpha,
                                                          const std::vector<SpinorField>& theta,
                                                          const DiracSymbol& sym, double T, double dt) {
  const long n = long(std::llround(T / dt));
  require(n >= 1 && std::abs(double(n) * dt - T) <= 1e-9 * std::max(1.0, T), ErrorCode::time_grid_mismatch,
          "T must be an integer multiple of dt");
  require(alpha.size() == std::size_t(n + 1) && theta.size() == std::size_t(n + 1), ErrorCode::time_grid_mismatch,
          "alpha and Theta must be sampled at every step");
  for (long k = 0; k <= n; ++k) {
    const double tk = beta0.t + double(k) * dt;
    require(std::abs(alpha[std::size_t(k)].t - tk) <= 1e-9 * std::max(1.0, T) &&
                std::abs(theta[std::size_t(k)].t - tk) <= 1e-9 * std::max(1.0, T),
            ErrorCode::time_grid_mismatch, "sample times do not match the beta time grid");
  }
  std::vector<SpinorField> out;
  out.reserve(std::size_t(n + 1));
  SpinorField b = beta0;
  out.push_back(b);
  for (long k = 0; k < n; ++k) {
    inhomogeneous_dirac_step(b, alpha[std::size_t(k)], alpha[std::size_t(k + 1)], theta[std::size_t(k)],
                             theta[std::size_t(k + 1)], dt, sym);
    b.t = beta0.t + double(k + 1) * dt;
    out.push_back(b);
  }
  return out;
}

struct ExistenceTime {
  double T = 0.0;
  double R = 0.0;   // ||alpha0||_{H^s}
  double Cs = 1.0;  // algebra constant (configured)
};

// T = 1 / (8 (b1 + 2 b2) R^2 C_s^2); a diagnostic, not a guaranteed time.
inline ExistenceTime local_existence_time(double R, const DiracSymbol& sym, double Cs = 1.0) {
  require(R >= 0.0 && Cs > 0.0, ErrorCode::invalid_parameter, "need R >= 0 and C_s > 0");
  ExistenceTime e;
  e.R = R;
  e.Cs = Cs;
  const double den = 8.0 * (sym.b1 + 2.0 * sym.b2) * R * R * Cs * Cs;
  e.T = den == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / den;
  return e;
}

inline ExistenceTime local_existence_time(const SpinorField& alpha0, int s, const DiracSymbol& sym, double Cs = 1.0) {
  require(s > 1, ErrorCode::invalid_parameter, "local existence needs s > 1");
  return local_existence_time(scaled_sobolev_norm(alpha0, s, 1.0), sym, Cs);
}

}  // namespace honeydirac

namespace honeydirac {

struct GaussianEnvelope {
  double x1 = 0.0, x2 = 0.0;  // centre relative to the box centre
  double width = 1.0;
  double p1 = 0.0, p2 = 0.0;  // carrier wavenumber
  cplx weight = 1.0;
};

// alpha_c = weight_c exp(-|x - x_c|^2 / (2 w^2) + i p.x), periodised over the box
// and scaled to the requested total mass.
inline SpinorField gaussian_spinor(const RectGrid& g, const GaussianEnvelope& e1, const GaussianEnvelope& e2,
                                   double mass = 1.0) {
  SpinorField f(g);
  const GaussianEnvelope* env[2] = {&e1, &e2};
  for (int c = 0; c < 2; ++c) {
    const auto& e = *env[c];
    const double cx = 0.5 * g.L1 + e.x1, cy = 0.5 * g.L2 + e.x2;
    for (std::size_t i = 0; i < g.nx; ++i)
      for (std::size_t j = 0; j < g.ny; ++j) {
        cplx v = 0.0;
        for (int a = -1; a <= 1; ++a)
          for (int b = -1; b <= 1; ++b) {
            const double dx = g.x(i) - cx + a * g.L1, dy = g.y(j) - cy + b * g.L2;
            v += std::exp(-(dx * dx + dy * dy) / (2.0 * e.width * e.width));
          }
        const double dx = g.x(i) - cx, dy = g.y(j) - cy;
        f[c](i, j) = e.weight * v * std::polar(1.0, e.p1 * dx + e.p2 * dy);
      }
  }
  const double m = f.mass();
  if (m > 0.0 && mass > 0.0) {
    const double s = std::sqrt(mass / m);
    f.alpha1 *= s;
    f.alpha2 *= s;
  }
  return f;
}

}  // namespace honeydirac
