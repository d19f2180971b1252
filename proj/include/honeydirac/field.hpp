#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>

#include "honeydirac/error.hpp"
#include "honeydirac/fft.hpp"
#include "honeydirac/grid.hpp"

namespace honeydirac {

// Two-component periodic field on a box; carries alpha, beta or Theta.
struct SpinorField {
  RectGrid grid;
  ComplexField alpha1, alpha2;
  double t = 0.0;

  SpinorField() = default;
  explicit SpinorField(const RectGrid& g, double time = 0.0)
      : grid(g), alpha1(g.nx, g.ny), alpha2(g.nx, g.ny), t(time) {}

  ComplexField& operator[](int c) { return c == 0 ? alpha1 : alpha2; }
  const ComplexField& operator[](int c) const { return c == 0 ? alpha1 : alpha2; }

  double mass() const {
    double s = 0.0;
    for (std::size_t k = 0; k < alpha1.size(); ++k) s += std::norm(alpha1[k]) + std::norm(alpha2[k]);
    return s * grid.cell_volume();
  }

  double sup(int c) const {
    double m = 0.0;
    for (const auto& v : (*this)[c]) m = std::max(m, std::abs(v));
    return m;
  }

  bool finite() const {
    for (int c = 0; c < 2; ++c)
      for (const auto& v : (*this)[c])
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }
};

inline double l2_norm_sq(const ComplexField& f, const RectGrid& g) {
  double s = 0.0;
  for (const auto& v : f) s += std::norm(v);
  return s * g.cell_volume();
}

// Multiplies the spectrum of f by sym(xi1, xi2) and transforms back.
inline ComplexField apply_multiplier(const ComplexField& f, const RectGrid& g,
                                     const std::function<cplx(double, double, std::size_t, std::size_t)>& sym) {
  ComplexField s = fft_forward(f);
  for (std::size_t i = 0; i < g.nx; ++i) {
    const double x1 = g.xi1(i);
    for (std::size_t j = 0; j < g.ny; ++j) s(i, j) *= sym(x1, g.xi2(j), i, j);
  }
  return fft_backward(s);
}

// Spectral partial derivative along axis l (0 or 1); the Nyquist slot of an
// even axis is dropped for odd derivatives.
inline ComplexField spectral_derivative(const ComplexField& f, const RectGrid& g, int l) {
  return apply_multiplier(f, g, [&](double x1, double x2, std::size_t i, std::size_t j) {
    if (l == 0) return is_nyquist(i, g.nx) ? cplx(0.0) : cplx(0.0, x1);
    return is_nyquist(j, g.ny) ? cplx(0.0) : cplx(0.0, x2);
  });
}

inline ComplexField spectral_laplacian(const ComplexField& f, const RectGrid& g) {
  return apply_multiplier(f, g, [](double x1, double x2, std::size_t, std::size_t) { return cplx(-(x1 * x1 + x2 * x2)); });
}

// sum_{g1 + g2 <= s} (eps xi1)^{2 g1} (eps xi2)^{2 g2}
inline double sobolev_weight(double xi1, double xi2, int s, double eps) {
  const double a = (eps * xi1) * (eps * xi1), b = (eps * xi2) * (eps * xi2);
  double w = 0.0, pa = 1.0;
  for (long g1 = 0; g1 <= s; ++g1) {
    double pb = 1.0;
    for (long g2 = 0; g2 <= s - g1; ++g2) {
      w += pa * pb;
      pb *= b;
    }
    pa *= a;
  }
  return w;
}

// H^s_eps norm from Fourier-series coefficients on the box.
inline double scaled_sobolev_norm_from_spectrum(const ComplexField& spec, const RectGrid& g, int s, double eps) {
  require(s >= 0, ErrorCode::invalid_parameter, "Sobolev index must be a nonnegative integer");
  double acc = 0.0;
  for (std::size_t i = 0; i < g.nx; ++i) {
    const double x1 = g.xi1(i);
    for (std::size_t j = 0; j < g.ny; ++j) acc += std::norm(spec(i, j)) * sobolev_weight(x1, g.xi2(j), s, eps);
  }
  return std::sqrt(acc * g.area());
}

// ||f||^2 = sum_{|gamma| <= s} ||(eps d)^gamma f||^2_{L^2}.
inline double scaled_sobolev_norm(const ComplexField& f, const RectGrid& g, int s, double eps) {
  return scaled_sobolev_norm_from_spectrum(fft_forward(f), g, s, eps);
}

inline double scaled_sobolev_norm(const SpinorField& f, int s, double eps) {
  const double a = scaled_sobolev_norm(f.alpha1, f.grid, s, eps);
  const double b = scaled_sobolev_norm(f.alpha2, f.grid, s, eps);
  return std::sqrt(a * a + b * b);
}

// Spectral interpolation of a coarse field onto a finer grid over the same box.
inline ComplexField spectral_resample(const ComplexField& f, const RectGrid& from, const RectGrid& to) {
  require(std::abs(from.L1 - to.L1) <= 1e-12 * to.L1 && std::abs(from.L2 - to.L2) <= 1e-12 * to.L2,
          ErrorCode::non_commensurate_grid, "resampling requires identical boxes");
  const ComplexField s = fft_forward(f);
  ComplexField t(to.nx, to.ny);
  for (std::size_t i = 0; i < from.nx; ++i) {
    if (is_nyquist(i, from.nx)) continue;
    const long a = signed_index(i, from.nx);
    if (std::abs(a) >= long(to.nx + 1) / 2) continue;
    for (std::size_t j = 0; j < from.ny; ++j) {
      if (is_nyquist(j, from.ny)) continue;
      const long b = signed_index(j, from.ny);
      if (std::abs(b) >= long(to.ny + 1) / 2) continue;
      t(slot_of(a, to.nx), slot_of(b, to.ny)) = s(i, j);
    }
  }
  return fft_backward(t);
}

}  // namespace honeydirac
