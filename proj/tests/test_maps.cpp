#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "phlab/errors.hpp"
#include "phlab/maps.hpp"

using namespace phlab;

TEST(MapSpec, RejectsInvertibleMatrices) {
  for (const IntMatrix2 m : {IntMatrix2{2, 1, 1, 1}, IntMatrix2{0, 1, 1, 0}}) {
    try {
      MapSpec::linear(m).validate();
      FAIL() << "accepted det = " << m.det();
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find("det"), std::string::npos) << e.what();
    }
  }
  EXPECT_THROW(MapSpec::linear({1, 2, 2, 4}).validate(), ConfigError);
  EXPECT_NO_THROW(MapSpec::f_B().validate());
}

TEST(MapSpec, JsonRoundTrip) {
  for (const char* name : {"f_A", "f_B", "example3", "example4"}) {
    const MapSpec s = MapSpec::preset(name);
    EXPECT_EQ(map_spec_from_json(to_json(s)), s) << name;
    EXPECT_EQ(map_spec_from_json(name), s);
  }
  EXPECT_THROW(MapSpec::preset("f_C"), ConfigError);
  EXPECT_THROW(map_spec_from_json({{"kind", "linear"}, {"matrix", {2, 1, 1, 1}}}), ConfigError);
  EXPECT_THROW(map_spec_from_json({{"kind", "linear"}, {"matrix", {2.5, 1, 1, 1}}}), ConfigError);
}

TEST(MapSpec, EigenData) {
  const LinearEigenData e = linear_eigen_data(MapSpec::f_B().matrix);
  EXPECT_TRUE(e.dominated);
  EXPECT_NEAR(e.lambda_u, (5.0 + std::sqrt(5.0)) / 2.0, 1e-15);
  EXPECT_NEAR(e.lambda_c, (5.0 - std::sqrt(5.0)) / 2.0, 1e-15);
  EXPECT_NEAR(e.e_u.y / e.e_u.x, (std::sqrt(5.0) - 1.0) / 2.0, 1e-15);
  const LinearEigenData a = linear_eigen_data(MapSpec::f_A().matrix);
  EXPECT_EQ(a.lambda_u, 3.0);
  EXPECT_EQ(a.lambda_c, 2.0);
}

TEST(Endomorphism, LiftIsEquivariant) {
  for (const char* name : {"f_B", "example3", "example4"}) {
    const Endomorphism f(MapSpec::preset(name));
    const Vec2 X{0.41, 0.77};
    const Vec2 k{2.0, -3.0};
    const Vec2 lhs = f.lift(X + k);
    const Vec2 rhs = f.lift(X) + f.linear() * k;
    EXPECT_NEAR(lhs.x, rhs.x, 1e-13) << name;
    EXPECT_NEAR(lhs.y, rhs.y, 1e-13) << name;
  }
}

TEST(Endomorphism, InverseBranchesCoverFiber) {
  for (const char* name : {"f_A", "f_B", "example3", "example4"}) {
    const Endomorphism f(MapSpec::preset(name));
    const TorusPoint p = wrap(0.123, 0.456);
    const auto pre = f.inverse_branches(p);
    ASSERT_EQ(static_cast<int>(pre.size()), f.degree()) << name;
    for (int b = 0; b < f.degree(); ++b) {
      EXPECT_LT(torus_distance(f.evaluate(pre[static_cast<std::size_t>(b)]), p), 1e-13);
      EXPECT_EQ(f.branch_index(pre[static_cast<std::size_t>(b)], p), b);
      for (int c = b + 1; c < f.degree(); ++c) {
        EXPECT_GT(torus_distance(pre[static_cast<std::size_t>(b)], pre[static_cast<std::size_t>(c)]), 0.1);
      }
    }
  }
}

TEST(Endomorphism, PerturbedDerivativeMatchesFiniteDifferences) {
  const Endomorphism f(MapSpec::example4());
  const Vec2 q = f.spec().perturbation->q.coords();
  const double a = f.spec().perturbation->a_box;
  for (const Vec2 off : {Vec2{0.3, 0.2}, Vec2{-0.7, 0.6}, Vec2{0.55, -0.45}}) {
    const Vec2 X = q + f.eigen().e_u * (off.x * a) + f.eigen().e_c * (off.y * a);
    const Mat2 D = f.derivative_at(X);
    const double h = 1e-7;
    const Vec2 cx = (f.lift(X + Vec2{h, 0}) - f.lift(X - Vec2{h, 0})) / (2 * h);
    const Vec2 cy = (f.lift(X + Vec2{0, h}) - f.lift(X - Vec2{0, h})) / (2 * h);
    EXPECT_NEAR(D.a, cx.x, 1e-6);
    EXPECT_NEAR(D.c, cx.y, 1e-6);
    EXPECT_NEAR(D.b, cy.x, 1e-6);
    EXPECT_NEAR(D.d, cy.y, 1e-6);
    const Vec2 d{1e-11, -2e-11};
    const Vec2 disp = f.displace(X, d);
    const Vec2 lin = D * d;
    EXPECT_NEAR(disp.x, lin.x, 1e-19);
    EXPECT_NEAR(disp.y, lin.y, 1e-19);
  }
  EXPECT_FALSE(f.nonaffine_intervals(q - Vec2{0.2, 0}, q + Vec2{0.2, 0}).empty());
  EXPECT_TRUE(Endomorphism(MapSpec::f_B()).nonaffine_intervals({0, 0}, {3, 3}).empty());
}

TEST(Endomorphism, Example3KeepsTheThirdsInvariant) {
  const Endomorphism f(MapSpec::example3());
  for (int i = 0; i < 50; ++i) {
    const double x = i / 50.0;
    EXPECT_NEAR(f.evaluate(wrap(x, 1.0 / 3.0)).y(), 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(f.evaluate(wrap(x, 2.0 / 3.0)).y(), 1.0 / 3.0, 1e-15);
  }
  // the perturbation tilts the vertical direction near q
  const Mat2 D = f.derivative(f.spec().perturbation->q);
  EXPECT_NEAR(D.c / D.a, 4.0 * 0.01 / 3.0, 1e-12);
}

TEST(Cones, Oracles) {
  const Endomorphism fA(MapSpec::f_A()), fB(MapSpec::f_B());
  const ConeCertificate a = certify_cones(fA, ConeField::from_slopes(-0.5, 0.5), 1, 64);
  EXPECT_TRUE(a.verified);
  EXPECT_GE(a.sigma, 2.68);
  EXPECT_NEAR(a.sigma, std::hypot(3.0, 1.0) / std::hypot(1.0, 0.5), 1e-9);
  const ConeCertificate b = certify_cones(fB, ConeField::from_slopes(0.2, 1.2), 1, 64);
  EXPECT_TRUE(b.verified);
  EXPECT_GE(b.sigma, 3.4);
  const ConeCertificate v = certify_cones(fA, {Direction::from_angle(std::numbers::pi / 2), 0.3}, 1, 64);
  EXPECT_FALSE(v.verified);
  EXPECT_GE(v.worst_i, 0);
  EXPECT_THROW(certify_cones(fA, ConeField::from_slopes(-0.5, 0.5), 0, 64), ConfigError);
}

TEST(Cones, PerturbedMapsStillCertify) {
  const Endomorphism e4(MapSpec::example4());
  const double th = Direction::from_vector(e4.eigen().e_u).theta();
  const ConeCertificate c = certify_cones(e4, {Direction::from_angle(th), 0.3}, 1, 64);
  EXPECT_TRUE(c.verified);
  EXPECT_GT(c.sigma, 3.0);
}
