#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "honeydirac/lattice.hpp"

using namespace honeydirac;

namespace {
const double pi = std::numbers::pi;
}

TEST(Lattice, DualityRelations) {
  for (double a : {1.0, 2.0, 0.37}) {
    const auto g = build_lattice(a);
    EXPECT_NEAR(g.v1.dot(g.k1), 2 * pi, 1e-12);
    EXPECT_NEAR(g.v2.dot(g.k2), 2 * pi, 1e-12);
    EXPECT_NEAR(g.v1.dot(g.k2), 0.0, 1e-12);
    EXPECT_NEAR(g.v2.dot(g.k1), 0.0, 1e-12);
  }
}

TEST(Lattice, ScalesAndArea) {
  const auto g1 = build_lattice(1.0);
  EXPECT_NEAR(g1.q, 4 * pi / std::sqrt(3.0), 1e-14);
  const auto g2 = build_lattice(2.0);
  const double cross = std::abs(g2.v1.x() * g2.v2.y() - g2.v1.y() * g2.v2.x());
  EXPECT_NEAR(g2.cellArea, cross, 1e-14);
  EXPECT_NEAR(g2.cellArea, 2 * std::sqrt(3.0), 1e-14);
}

TEST(Lattice, RejectsNonPositiveConstant) {
  EXPECT_THROW(build_lattice(0.0), Error);
  EXPECT_THROW(build_lattice(-1.0), Error);
}

TEST(Lattice, RotationMatrix) {
  const auto g = build_lattice();
  EXPECT_NEAR(g.R.determinant(), 1.0, 1e-15);
  EXPECT_LT((g.R.transpose() * g.R - Mat2::Identity()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((g.R * g.R * g.R - Mat2::Identity()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((g.R * g.k1 - g.k2).norm(), 1e-13);
  EXPECT_LT((g.R * g.k2 + g.k1 + g.k2).norm(), 1e-13);
}

TEST(Lattice, VertexRelations) {
  const auto g = build_lattice();
  EXPECT_LT((g.R * g.K - (g.K + g.k2)).norm(), 1e-13);
  EXPECT_LT((g.R * g.R * g.K - (g.K - g.k1)).norm(), 1e-13);
  EXPECT_LT((g.Kprime + g.K).norm(), 1e-15);
  EXPECT_LT((g.Kprime - (g.k2 - g.k1) / 3.0).norm(), 1e-13);
}

TEST(Lattice, TauIdentities) {
  const auto g = build_lattice();
  EXPECT_LT(std::abs(g.tau * g.tau * g.tau - 1.0), 1e-15);
  EXPECT_LT(std::abs(1.0 + g.tau + std::conj(g.tau)), 1e-15);
}

TEST(Lattice, RotationIndexExamples) {
  EXPECT_EQ(rotate_dual_index({0, 0}, Anchor::K), (DualIndex{0, 1}));
  EXPECT_EQ(rotate_dual_index(rotate_dual_index({0, 0}, Anchor::K), Anchor::K), (DualIndex{-1, 0}));
}

TEST(Lattice, RotationIndexMatchesFloatingRotation) {
  const auto g = build_lattice();
  for (Anchor an : {Anchor::origin, Anchor::K, Anchor::Kprime}) {
    const Vec2 k0 = g.anchor_vector(an);
    for (int m1 = -6; m1 <= 6; ++m1)
      for (int m2 = -6; m2 <= 6; ++m2) {
        const DualIndex m{m1, m2};
        const DualIndex r = rotate_dual_index(m, an);
        EXPECT_LT((g.shifted_vector(r, k0) - g.R * g.shifted_vector(m, k0)).norm(), 1e-12);
        EXPECT_NEAR(g.shifted_vector(r, k0).norm(), g.shifted_vector(m, k0).norm(), 1e-12);
        EXPECT_EQ(rotate_dual_index(rotate_dual_index(r, an), an), m);
        EXPECT_EQ(rotate_dual_index_inverse(r, an), m);
      }
  }
}

// The box image under the K-anchored map does not fit in |m| <= M+1 (e.g.
// (M, -M) -> (M, 2M+1)); the map is still a bijection of Z^2, and the image of
// the box is a set of the same size inside |m| <= 2M+1.
TEST(Lattice, RotationIndexBijectiveOnBox) {
  for (int M : {1, 4, 12}) {
    const auto box = PlaneWaveBasis::box(M);
    std::set<DualIndex> image;
    for (const auto& m : box.indices()) {
      const DualIndex r = rotate_dual_index(m, Anchor::K);
      EXPECT_LE(std::max(std::abs(r.m1), std::abs(r.m2)), 2 * M + 1);
      image.insert(r);
    }
    EXPECT_EQ(image.size(), box.size());
  }
}

TEST(Lattice, DiscBasisClosedUnderRotation) {
  const auto g = build_lattice();
  for (Anchor an : {Anchor::K, Anchor::Kprime}) {
    const auto b = PlaneWaveBasis::disc(g, g.anchor_vector(an), 12);
    for (const auto& m : b.indices()) EXPECT_TRUE(b.contains(rotate_dual_index(m, an)));
    EXPECT_NEAR(double(b.size()), 625.0, 20.0);
  }
}

TEST(Lattice, BoxBasisBijection) {
  const auto b = PlaneWaveBasis::box(3);
  EXPECT_EQ(b.size(), 49u);
  for (std::size_t p = 0; p < b.size(); ++p) EXPECT_EQ(b.position(b[p]), long(p));
  EXPECT_EQ(b.position({4, 0}), -1);
  const auto g = build_lattice();
  for (const auto& m : b.indices()) EXPECT_LT((g.dual_vector(-m) + g.dual_vector(m)).norm(), 1e-14);
}

TEST(Lattice, PathGammaToK) {
  const auto g = build_lattice();
  const auto p = high_symmetry_path(g, {"G", "K"}, 3);
  ASSERT_EQ(p.size(), 3u);
  EXPECT_LT(p[0].k.norm(), 1e-15);
  EXPECT_LT((p[1].k - g.K / 2.0).norm(), 1e-15);
  EXPECT_EQ(p[2].k, g.K);
}

TEST(Lattice, DefaultPathContainsBothVertices) {
  const auto g = build_lattice();
  const auto p = default_path(g, 10);
  bool hasK = false, hasKp = false;
  for (const auto& x : p) {
    hasK = hasK || x.k == g.K;
    hasKp = hasKp || x.k == g.Kprime;
  }
  EXPECT_TRUE(hasK);
  EXPECT_TRUE(hasKp);
  for (std::size_t i = 1; i < p.size(); ++i) EXPECT_GT(p[i].arclength, p[i - 1].arclength);
}

TEST(Lattice, PathErrors) {
  const auto g = build_lattice();
  EXPECT_THROW(high_symmetry_path(g, {"G"}, 3), Error);
  EXPECT_THROW(high_symmetry_path(g, {"G", "K"}, 1), Error);
}

TEST(Lattice, CircleAroundK) {
  const auto g = build_lattice();
  const auto pts = circle_around(g.K, 0.01, 4);
  ASSERT_EQ(pts.size(), 4u);
  for (const auto& p : pts) EXPECT_NEAR((p - g.K).norm(), 0.01, 1e-15);
}
