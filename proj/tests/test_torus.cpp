#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "phlab/bump.hpp"
#include "phlab/errors.hpp"
#include "phlab/polyline.hpp"
#include "phlab/rng.hpp"
#include "phlab/torus.hpp"

using namespace phlab;

TEST(Torus, WrapIntoUnitSquare) {
  const TorusPoint p = wrap(-0.25, 3.75);
  EXPECT_DOUBLE_EQ(p.x(), 0.75);
  EXPECT_DOUBLE_EQ(p.y(), 0.75);
  EXPECT_EQ(wrap(1.0, -1e-20).x(), 0.0);
  EXPECT_LT(wrap(0.0, -1e-20).y(), 1.0);
  EXPECT_THROW(wrap(NAN, 0.0), ConfigError);
}

TEST(Torus, ShortestDifference) {
  const Vec2 d = lift_difference(wrap(0.95, 0.1), wrap(0.05, 0.9));
  EXPECT_NEAR(d.x, -0.1, 1e-15);
  EXPECT_NEAR(d.y, 0.2, 1e-15);
  EXPECT_NEAR(torus_distance(wrap(0.95, 0.1), wrap(0.05, 0.9)), std::hypot(0.1, 0.2), 1e-15);
  const Vec2 l = nearest_lift(wrap(0.9, 0.1), {3.05, -1.95});
  EXPECT_NEAR(l.x, 2.9, 1e-15);
  EXPECT_NEAR(l.y, -1.9, 1e-15);
}

TEST(Torus, ProjectiveAngles) {
  const Direction a = Direction::from_vector({1.0, 1.0});
  const Direction b = Direction::from_vector({-1.0, -1.0});
  EXPECT_NEAR(angle_between(a, b), 0.0, 1e-15);
  EXPECT_NEAR(angle_between(a, Direction::from_vector({1.0, -1.0})), std::numbers::pi / 2, 1e-15);
  EXPECT_TRUE(std::isinf(Direction::from_vector({0.0, 2.0}).slope()));
  EXPECT_THROW(Direction::from_vector({0.0, 0.0}), ConfigError);
  const Vec2 u = oriented_unit(a, {-3.0, -0.1});
  EXPECT_LT(u.x, 0.0);
}

TEST(Torus, MatrixHelpers) {
  const Mat2 m{2.0, 1.0, 1.0, 1.0};
  const Mat2 r = m * m.inverse();
  EXPECT_NEAR(r.a, 1.0, 1e-15);
  EXPECT_NEAR(r.b, 0.0, 1e-15);
  EXPECT_NEAR(m.operator_norm() * m.min_stretch(), std::fabs(m.det()), 1e-14);
}

TEST(Rng, MatchesDocumentedStream) {
  CounterRng r(0);
  EXPECT_EQ(r.next_u64(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(r.next_u64(), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(r.next_u64(), 0x06c45d188009454fULL);
  CounterRng s(42);
  EXPECT_EQ(s.at(1), 0x28efe333b266f103ULL);
  EXPECT_DOUBLE_EQ(s.next_double(), 0.7415648787718233);
  const CounterRng sub = CounterRng(42).substream(7);
  EXPECT_EQ(sub.key(), 0xe12e63b8e0ef0a35ULL);
  EXPECT_EQ(sub.at(0), 0x59e31e124c3532f0ULL);
}

TEST(Rng, BelowStaysInRange) {
  CounterRng r(3);
  int hist[3] = {0, 0, 0};
  for (int i = 0; i < 3000; ++i) ++hist[r.below(3)];
  for (int h : hist) EXPECT_GT(h, 900);
  EXPECT_THROW(r.below(0), ConfigError);
}

TEST(Bump, Profiles) {
  using namespace bump;
  EXPECT_DOUBLE_EQ(psi1(0.5), 1.0);
  EXPECT_DOUBLE_EQ(psi1(-0.5), -1.0);
  EXPECT_DOUBLE_EQ(psi1(0.2), 0.4);
  EXPECT_EQ(psi1(1.0), 0.0);
  EXPECT_EQ(psi1(1.3), 0.0);
  EXPECT_DOUBLE_EQ(psi2(0.3), 1.0);
  EXPECT_EQ(psi2(-1.2), 0.0);
  for (double s : {-0.9, -0.7, -0.3, 0.1, 0.6, 0.8, 0.95}) {
    EXPECT_DOUBLE_EQ(psi1(-s), -psi1(s));
    EXPECT_DOUBLE_EQ(psi2(-s), psi2(s));
    const double h = 1e-6;
    EXPECT_NEAR(dpsi1(s), (psi1(s + h) - psi1(s - h)) / (2 * h), 1e-7);
    EXPECT_NEAR(dpsi2(s), (psi2(s + h) - psi2(s - h)) / (2 * h), 1e-7);
    EXPECT_NEAR(psi1_delta(s, 1e-9), dpsi1(s) * 1e-9, 1e-16);
    EXPECT_NEAR(psi2_delta(s, 0.01), psi2(s + 0.01) - psi2(s), 1e-15);
  }
}

TEST(Bump, SmoothAtJoints) {
  using namespace bump;
  for (double s : {0.5, 1.0}) {
    EXPECT_NEAR(psi1(s - 1e-9), psi1(s + 1e-9), 1e-8);
    EXPECT_NEAR(dpsi1(s - 1e-9), dpsi1(s + 1e-9), 1e-7);
    EXPECT_NEAR(dpsi2(s - 1e-9), dpsi2(s + 1e-9), 1e-7);
  }
}

TEST(Polyline, ArclengthAndTrim) {
  const Polyline c = Polyline::from_points({{0, 0}, {0.3, 0.4}, {0.6, 0.8}}, 1);
  EXPECT_DOUBLE_EQ(c.s_min(), -0.5);
  EXPECT_DOUBLE_EQ(c.s_max(), 0.5);
  const Vec2 p = c.point_at(0.25);
  EXPECT_NEAR(p.x, 0.45, 1e-15);
  EXPECT_THROW(c.point_at(0.6), ConfigError);
  const Polyline t = c.trimmed(-0.1, 0.2);
  EXPECT_NEAR(t.length(), 0.3, 1e-15);
  EXPECT_NEAR(t.base_point().x, 0.3, 1e-15);
  EXPECT_LE(c.resampled(0.01).max_segment(), 0.01 + 1e-15);
}

TEST(Polyline, RasterizationSplitsLengthExactly) {
  const Vec2 a{0.05, 0.93}, b{2.71, -0.42};
  double total = 0.0;
  int cells = 0;
  for_each_piece(a, b, [&](Vec2 u, Vec2 v) {
    rasterize_segment(u, v, 7, [&](int i, int j, double len) {
      EXPECT_GE(i, 0);
      EXPECT_LT(i, 7);
      EXPECT_GE(j, 0);
      EXPECT_LT(j, 7);
      total += len;
      ++cells;
    });
  });
  EXPECT_NEAR(total, (b - a).norm(), 1e-12);
  EXPECT_GT(cells, 20);
}

TEST(Polyline, AxisAlignedSegmentOnGridLine) {
  double total = 0.0;
  rasterize_segment({0.0, 0.25}, {1.0, 0.25}, 4, [&](int, int j, double len) {
    EXPECT_EQ(j, 1);
    total += len;
  });
  EXPECT_NEAR(total, 1.0, 1e-15);
}
