#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "honeydirac/error.hpp"
#include "honeydirac/fft.hpp"
#include "honeydirac/field.hpp"
#include "honeydirac/grid.hpp"
#include "honeydirac/potential.hpp"

namespace honeydirac {

enum class NlsLinearScheme {
  exact_blocks,      // exp(-i dt H) applied exactly per quasimomentum block
  kinetic_potential  // Strang kinetic / potential split inside the linear step
};

// Linear part of i d_t psi = -eps Lap psi + V(x/eps)/eps psi on a commensurate
// grid. V couples fine frequencies that differ by k_m/eps, so the spectral
// discretisation splits into 2 cellsX cellsY independent real symmetric
// blocks of size ppcX ppcY / 2, one per quasimomentum.
class NlsLinearPropagator {
 public:
  NlsLinearPropagator(const FourierPotential& V, const CommensurateGrid& grid, NlsLinearScheme scheme)
      : grid_(grid), scheme_(scheme), eps_(grid.eps) {
    require(grid.ppcX % 2 == 0 && grid.ppcY % 2 == 0, ErrorCode::invalid_parameter,
            "points per cell must be even in both directions");
    if (scheme_ == NlsLinearScheme::kinetic_potential) {
      potential_ = evaluate_on_grid(V, grid, grid.eps).values;
      return;
    }
    build_blocks(V);
  }

  const CommensurateGrid& grid() const { return grid_; }
  NlsLinearScheme scheme() const { return scheme_; }
  std::size_t block_count() const { return reps_; }
  std::size_t block_size() const { return bs_; }

  // psi <- exp(-i dt H) psi, with psi given in physical space.
  void apply(ComplexField& psi, double dt) {
    if (scheme_ == NlsLinearScheme::kinetic_potential) {
      apply_split(psi, dt);
      return;
    }
    fft_forward(psi, work_);
    apply_spectral(work_, dt);
    fft_backward(work_, psi);
  }

  // Same as apply() on Fourier-series coefficients (exact scheme only).
  void apply_spectral(ComplexField& spec, double dt) {
    require(scheme_ == NlsLinearScheme::exact_blocks, ErrorCode::invalid_parameter,
            "spectral application needs the exact block scheme");
    if (dt != phase_dt_) {
      phase_.resize(lambda_.size());
      for (std::size_t k = 0; k < lambda_.size(); ++k) phase_[k] = std::polar(1.0, -lambda_[k] * dt);
      phase_dt_ = dt;
    }
    const std::size_t n = bs_;
    std::vector<cplx> v(n), w(n);
    for (std::size_t b = 0; b < reps_; ++b) {
      const std::size_t* sl = &slots_[b * n];
      const double* Q = &Q_[b * n * n];
      const cplx* ph = &phase_[b * n];
      for (std::size_t i = 0; i < n; ++i) v[i] = spec[sl[i]];
      // w = diag(phase) Q^T v, Q stored row-major.
      std::fill(w.begin(), w.end(), cplx(0.0));
      for (std::size_t i = 0; i < n; ++i) {
        const cplx vi = v[i];
        const double* row = Q + i * n;
        for (std::size_t k = 0; k < n; ++k) w[k] += row[k] * vi;
      }
      for (std::size_t k = 0; k < n; ++k) w[k] *= ph[k];
      for (std::size_t i = 0; i < n; ++i) {
        const double* row = Q + i * n;
        cplx s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += row[k] * w[k];
        spec[sl[i]] = s;
      }
    }
  }

  // Eigenvalues of the block that contains the given fine slot (diagnostics).
  std::vector<double> block_eigenvalues_at(std::size_t slot) const {
    for (std::size_t b = 0; b < reps_; ++b)
      for (std::size_t i = 0; i < bs_; ++i)
        if (slots_[b * bs_ + i] == slot) return std::vector<double>(lambda_.begin() + long(b * bs_), lambda_.begin() + long((b + 1) * bs_));
    return {};
  }

 private:
  void build_blocks(const FourierPotential& V) {
    const CommensurateGrid& g = grid_;
    const int px = g.ppcX, py = g.ppcY;
    const long cX = g.cellsX, cY = g.cellsY;
    // Members of a block: (s, d) with s = m1 + m2 mod ppcX, d = m1 - m2 mod ppcY, s = d mod 2.
    std::vector<std::pair<int, int>> members;
    std::vector<long> member_of(std::size_t(px * py), -1);
    for (int s = 0; s < px; ++s)
      for (int d = 0; d < py; ++d)
        if ((s - d) % 2 == 0) {
          member_of[std::size_t(s * py + d)] = long(members.size());
          members.emplace_back(s, d);
        }
    bs_ = members.size();
    reps_ = std::size_t(cX * 2 * cY);
    slots_.resize(reps_ * bs_);
    Q_.resize(reps_ * bs_ * bs_);
    lambda_.resize(reps_ * bs_);
    const std::size_t n = bs_;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(long(n), long(n));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    std::size_t b = 0;
    for (long r1 = 0; r1 < cX; ++r1)
      for (long r2 = 0; r2 < 2 * cY; ++r2, ++b) {
        H.setZero();
        for (std::size_t i = 0; i < n; ++i) {
          const auto [s, d] = members[i];
          const std::size_t i1 = slot_of(r1 + cX * s, g.nx), i2 = slot_of(r2 + cY * d, g.ny);
          slots_[b * n + i] = i1 * g.ny + i2;
          const double x1 = g.xi1(i1), x2 = g.xi2(i2);
          H(long(i), long(i)) += eps_ * (x1 * x1 + x2 * x2);
          for (const auto& [m, c] : V.coeffs) {
            const int s2 = int(((s + m.m1 + m.m2) % px + px) % px);
            const int d2 = int(((d + m.m1 - m.m2) % py + py) % py);
            const long j = member_of[std::size_t(s2 * py + d2)];
            H(j, long(i)) += c.real() / eps_;
          }
        }
        es.compute(H);
        if (es.info() != Eigen::Success) fail(ErrorCode::solver_failure, "block eigensolver failed");
        // One Newton-Schulz pass in extended precision keeps the propagator unitary to rounding.
        using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
        const MatL Ql = es.eigenvectors().cast<long double>();
        const MatL Qr = Ql + 0.5L * Ql * (MatL::Identity(long(n), long(n)) - Ql.transpose() * Ql);
        const Eigen::MatrixXd Qb = Qr.cast<double>();
        for (std::size_t i = 0; i < n; ++i) {
          lambda_[b * n + i] = es.eigenvalues()(long(i));
          for (std::size_t k = 0; k < n; ++k) Q_[(b * n + i) * n + k] = Qb(long(i), long(k));
        }
      }
  }

  void apply_split(ComplexField& psi, double dt) {
    for (std::size_t k = 0; k < psi.size(); ++k) psi[k] *= std::polar(1.0, -0.5 * dt * potential_[k] / eps_);
    fft_forward(psi, work_);
    for (std::size_t i = 0; i < grid_.nx; ++i) {
      const double x1 = grid_.xi1(i);
      for (std::size_t j = 0; j < grid_.ny; ++j) {
        const double x2 = grid_.xi2(j);
        work_(i, j) *= std::polar(1.0, -dt * eps_ * (x1 * x1 + x2 * x2));
      }
    }
    fft_backward(work_, psi);
    for (std::size_t k = 0; k < psi.size(); ++k) psi[k] *= std::polar(1.0, -0.5 * dt * potential_[k] / eps_);
  }

  CommensurateGrid grid_;
  NlsLinearScheme scheme_;
  double eps_;
  std::size_t bs_ = 0, reps_ = 0;
  std::vector<std::size_t> slots_;
  std::vector<double> Q_;
  std::vector<double> lambda_;
  std::vector<cplx> phase_;
  double phase_dt_ = std::numeric_limits<double>::quiet_NaN();
  RealField potential_;
  ComplexField work_;
};

inline void nls_nonlinear_step(ComplexField& psi, double kappa, double dt) {
  if (kappa == 0.0) return;
  for (auto& v : psi) v *= std::polar(1.0, -kappa * std::norm(v) * dt);
}

struct NlsObservables {
  double t = 0.0, mass = 0.0, sup = 0.0, hs_norm = 0.0;
};

struct NlsTrajectory {
  std::vector<NlsObservables> observables;
  std::vector<ComplexField> snapshots;
  bool blow_up = false;
  double blow_up_time = 0.0;
  double dt = 0.0;
  long steps = 0;
};

inline NlsObservables nls_observe(const ComplexField& psi, const CommensurateGrid& g, double t, int s) {
  NlsObservables o;
  o.t = t;
  o.mass = l2_norm_sq(psi, g);
  for (const auto& v : psi) o.sup = std::max(o.sup, std::abs(v));
  o.hs_norm = scaled_sobolev_norm(psi, g, s, g.eps);
  return o;
}

struct NlsRunOptions {
  double T = 0.5;
  double dt = 0.0;   // 0: eps / 8
  double kappa = 1.0;
  int snapshots = 10;
  int sobolev = 2;
  bool keep_snapshots = false;
  double blow_up_factor = 1e3;
};

// Strang splitting N(dt/2) L(dt) N(dt/2) for
// i d_t psi = -eps Lap psi + V(x/eps)/eps psi + kappa |psi|^2 psi.
inline NlsTrajectory solve_nls(const ComplexField& psi0, NlsLinearPropagator& lin, const NlsRunOptions& opt,
                               const std::function<void(double, const ComplexField&)>& on_snapshot = {}) {
  const CommensurateGrid& g = lin.grid();
  require(psi0.nx() == g.nx && psi0.ny() == g.ny, ErrorCode::invalid_parameter, "initial data has the wrong shape");
  require(g.ppcX >= 8 && g.ppcY >= 8, ErrorCode::resolution_error, "NLS needs at least 8 points per cell");
  const double dt_nom = opt.dt > 0.0 ? opt.dt : g.eps / 8.0;
  require(dt_nom <= g.eps / 4.0 * (1.0 + 1e-12), ErrorCode::invalid_parameter, "NLS time step must satisfy dt <= eps/4");
  require(opt.snapshots >= 1, ErrorCode::invalid_parameter, "need at least one output interval");
  long n = long(std::ceil(opt.T / dt_nom * (1.0 - 1e-12)));
  n = std::max<long>(n, opt.snapshots);
  if (n % opt.snapshots) n += opt.snapshots - n % opt.snapshots;
  const double dt = opt.T / double(n);
  const long stride = n / opt.snapshots;
  NlsTrajectory tr;
  tr.dt = dt;
  tr.steps = n;
  ComplexField psi = psi0;
  double sup0 = 0.0;
  for (const auto& v : psi) sup0 = std::max(sup0, std::abs(v));
  auto emit = [&](double t) {
    tr.observables.push_back(nls_observe(psi, g, t, opt.sobolev));
    if (opt.keep_snapshots) tr.snapshots.push_back(psi);
    if (on_snapshot) on_snapshot(t, psi);
  };
  emit(0.0);
  for (long s = 0; s < n; s += stride) {
    nls_nonlinear_step(psi, opt.kappa, 0.5 * dt);
    for (long k = 0; k < stride; ++k) {
      lin.apply(psi, dt);
      nls_nonlinear_step(psi, opt.kappa, k + 1 < stride ? dt : 0.5 * dt);
    }
    const double t = double(s + stride) * dt;
    double sup = 0.0;
    bool finite = true;
    for (const auto& v : psi) {
      sup = std::max(sup, std::abs(v));
      finite = finite && std::isfinite(v.real()) && std::isfinite(v.imag());
    }
    if (!finite || sup > opt.blow_up_factor * std::max(sup0, 1e-300)) {
      tr.blow_up = true;
      tr.blow_up_time = t;
      break;
    }
    emit(t);
  }
  return tr;
}

}  // namespace honeydirac
