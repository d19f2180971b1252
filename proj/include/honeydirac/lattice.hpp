#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "honeydirac/error.hpp"

namespace honeydirac {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

struct DualIndex {
  int m1 = 0;
  int m2 = 0;
  friend bool operator==(const DualIndex&, const DualIndex&) = default;
  friend auto operator<=>(const DualIndex&, const DualIndex&) = default;
  DualIndex operator-() const { return {-m1, -m2}; }
  DualIndex operator+(const DualIndex& o) const { return {m1 + o.m1, m2 + o.m2}; }
  DualIndex operator-(const DualIndex& o) const { return {m1 - o.m1, m2 - o.m2}; }
};

enum class Anchor { origin, K, Kprime };

struct LatticeGeometry {
  double a = 1.0;
  Vec2 v1, v2;
  Vec2 k1, k2;
  double q = 0.0;
  double cellArea = 0.0;
  Vec2 K, Kprime;
  Mat2 R;
  std::complex<double> tau;

  Vec2 dual_vector(const DualIndex& m) const { return double(m.m1) * k1 + double(m.m2) * k2; }

  Vec2 anchor_vector(Anchor anchor) const {
    switch (anchor) {
      case Anchor::K: return K;
      case Anchor::Kprime: return Kprime;
      default: return Vec2::Zero();
    }
  }

  Vec2 shifted_vector(const DualIndex& m, const Vec2& k) const { return k + dual_vector(m); }

  // Area of the dual cell, (2 pi)^2 / |Y|.
  double dual_cell_area() const { return 4.0 * std::numbers::pi * std::numbers::pi / cellArea; }
};

inline LatticeGeometry build_lattice(double a = 1.0) {
  require(a > 0.0 && std::isfinite(a), ErrorCode::invalid_parameter, "lattice constant must be positive");
  const double s3 = std::sqrt(3.0);
  const double pi = std::numbers::pi;
  LatticeGeometry g;
  g.a = a;
  g.v1 = a * Vec2(s3 / 2.0, 0.5);
  g.v2 = a * Vec2(s3 / 2.0, -0.5);
  g.q = 4.0 * pi / (a * s3);
  g.k1 = g.q * Vec2(0.5, s3 / 2.0);
  g.k2 = g.q * Vec2(0.5, -s3 / 2.0);
  g.cellArea = s3 / 2.0 * a * a;
  // (k1 - k2)/3 is the vertex compatible with R K = K + k2 and R^2 K = K - k1.
  g.K = (g.k1 - g.k2) / 3.0;
  g.Kprime = -g.K;
  g.R << -0.5, s3 / 2.0, -s3 / 2.0, -0.5;
  g.tau = std::polar(1.0, 2.0 * pi / 3.0);
  return g;
}

// Integer action of R on K*_m = anchor + k_m, from R k1 = k2, R k2 = -(k1 + k2),
// R K = K + k2 and R K' = K' - k2.
inline DualIndex rotate_dual_index(const DualIndex& m, Anchor anchor) {
  const int shift = anchor == Anchor::K ? 1 : (anchor == Anchor::Kprime ? -1 : 0);
  return {-m.m2, shift + m.m1 - m.m2};
}

inline DualIndex rotate_dual_index_inverse(const DualIndex& m, Anchor anchor) {
  return rotate_dual_index(rotate_dual_index(m, anchor), anchor);
}

enum class BasisKind { box, disc };

// Plane-wave index set with O(1) index -> position lookup.
class PlaneWaveBasis {
 public:
  // Centred box |m1|, |m2| <= M.
  static PlaneWaveBasis box(int M) {
    require(M >= 1, ErrorCode::invalid_parameter, "plane-wave cutoff M must be >= 1");
    PlaneWaveBasis b;
    b.M_ = M;
    b.kind_ = BasisKind::box;
    for (int m1 = -M; m1 <= M; ++m1)
      for (int m2 = -M; m2 <= M; ++m2) b.indices_.push_back({m1, m2});
    b.build_lookup();
    return b;
  }

  // All m with |k + k_m| <= rho where pi rho^2 equals (2M+1)^2 dual cells; keeps
  // roughly the same size as the box but is closed under R when k is K or K'.
  static PlaneWaveBasis disc(const LatticeGeometry& g, const Vec2& k, int M) {
    require(M >= 1, ErrorCode::invalid_parameter, "plane-wave cutoff M must be >= 1");
    PlaneWaveBasis b;
    b.M_ = M;
    b.kind_ = BasisKind::disc;
    b.center_ = k;
    const double n = double(2 * M + 1);
    const double rho = std::sqrt(n * n * g.dual_cell_area() / std::numbers::pi);
    b.radius_ = rho;
    const int reach = int(std::ceil(rho / (g.q * std::sqrt(3.0) / 2.0))) + 2;
    for (int m1 = -reach; m1 <= reach; ++m1)
      for (int m2 = -reach; m2 <= reach; ++m2) {
        const DualIndex m{m1, m2};
        // Small slack keeps rotation orbits intact despite rounding.
        if (g.shifted_vector(m, k).norm() <= rho * (1.0 + 1e-12)) b.indices_.push_back(m);
      }
    b.build_lookup();
    return b;
  }

  int cutoff() const { return M_; }
  BasisKind kind() const { return kind_; }
  double radius() const { return radius_; }
  const Vec2& center() const { return center_; }
  std::size_t size() const { return indices_.size(); }
  const std::vector<DualIndex>& indices() const { return indices_; }
  const DualIndex& operator[](std::size_t p) const { return indices_[p]; }
  int max_abs_index() const { return reach_; }

  // Position of m in the ordered list, or -1 if m is not a member.
  long position(const DualIndex& m) const {
    if (std::abs(m.m1) > reach_ || std::abs(m.m2) > reach_) return -1;
    return lookup_[std::size_t((m.m1 + reach_) * (2 * reach_ + 1) + (m.m2 + reach_))];
  }
  bool contains(const DualIndex& m) const { return position(m) >= 0; }

 private:
  void build_lookup() {
    reach_ = 0;
    for (const auto& m : indices_) reach_ = std::max({reach_, std::abs(m.m1), std::abs(m.m2)});
    const std::size_t w = std::size_t(2 * reach_ + 1);
    lookup_.assign(w * w, -1);
    for (std::size_t p = 0; p < indices_.size(); ++p) {
      const auto& m = indices_[p];
      lookup_[std::size_t((m.m1 + reach_) * (2 * reach_ + 1) + (m.m2 + reach_))] = long(p);
    }
  }

  int M_ = 0;
  BasisKind kind_ = BasisKind::box;
  Vec2 center_ = Vec2::Zero();
  double radius_ = 0.0;
  int reach_ = 0;
  std::vector<DualIndex> indices_;
  std::vector<long> lookup_;
};

inline PlaneWaveBasis make_basis(const LatticeGeometry& g, const Vec2& k, int M, BasisKind kind) {
  return kind == BasisKind::box ? PlaneWaveBasis::box(M) : PlaneWaveBasis::disc(g, k, M);
}

struct PathPoint {
  Vec2 k;
  double arclength = 0.0;
  std::string label;  // vertex name, empty for interior samples
};

struct NamedPoint {
  std::string name;
  Vec2 k;
};

inline NamedPoint symmetry_point(const LatticeGeometry& g, const std::string& name) {
  if (name == "G" || name == "Gamma") return {"G", Vec2::Zero()};
  if (name == "K") return {"K", g.K};
  if (name == "Kp" || name == "K'") return {"Kp", g.Kprime};
  if (name == "M") return {"M", g.k1 / 2.0};
  fail(ErrorCode::invalid_parameter, "unknown symmetry point '" + name + "'");
}

// Piecewise-linear path through the given vertices; each vertex is sampled
// exactly and shared vertices appear once.
inline std::vector<PathPoint> high_symmetry_path(const std::vector<NamedPoint>& vertices, int pointsPerSegment) {
  require(vertices.size() >= 2, ErrorCode::invalid_parameter, "path needs at least one segment");
  require(pointsPerSegment >= 2, ErrorCode::invalid_parameter, "pointsPerSegment must be >= 2");
  std::vector<PathPoint> out;
  double s = 0.0;
  out.push_back({vertices[0].k, 0.0, vertices[0].name});
  for (std::size_t seg = 0; seg + 1 < vertices.size(); ++seg) {
    const Vec2 a = vertices[seg].k, b = vertices[seg + 1].k;
    const double len = (b - a).norm();
    for (int i = 1; i < pointsPerSegment; ++i) {
      const double t = double(i) / double(pointsPerSegment - 1);
      const bool last = i == pointsPerSegment - 1;
      const Vec2 k = last ? b : Vec2(a + t * (b - a));
      out.push_back({k, s + t * len, last ? vertices[seg + 1].name : std::string()});
    }
    s += len;
  }
  return out;
}

inline std::vector<PathPoint> high_symmetry_path(const LatticeGeometry& g, const std::vector<std::string>& names,
                                                 int pointsPerSegment) {
  std::vector<NamedPoint> v;
  for (const auto& n : names) v.push_back(symmetry_point(g, n));
  return high_symmetry_path(v, pointsPerSegment);
}

// Gamma - K - M - Gamma - K'.
inline std::vector<PathPoint> default_path(const LatticeGeometry& g, int pointsPerSegment) {
  return high_symmetry_path(g, {"G", "K", "M", "G", "Kp"}, pointsPerSegment);
}

inline std::vector<Vec2> circle_around(const Vec2& center, double radius, int n, double phase = 0.0) {
  require(n >= 1, ErrorCode::invalid_parameter, "circle needs at least one point");
  std::vector<Vec2> pts;
  for (int i = 0; i < n; ++i) {
    const double th = phase + 2.0 * std::numbers::pi * double(i) / double(n);
    pts.push_back(center + radius * Vec2(std::cos(th), std::sin(th)));
  }
  return pts;
}

}  // namespace honeydirac
