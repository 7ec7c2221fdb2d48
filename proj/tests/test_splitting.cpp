#include <gtest/gtest.h>

#include <cmath>

#include "phlab/errors.hpp"
#include "phlab/lyapunov.hpp"
#include "phlab/splitting.hpp"

using namespace phlab;

namespace {

const double kLc = (5.0 - std::sqrt(5.0)) / 2.0;
const double kLu = (5.0 + std::sqrt(5.0)) / 2.0;

}  // namespace

TEST(Splitting, LinearMapGivesEigenDirections) {
  const Endomorphism f(MapSpec::f_B());
  const PastWord w = extend_past(f, wrap(0.3, 0.6), BranchChooser::uniform(1), 40);
  const SplittingEstimate s = splitting(f, w);
  EXPECT_LT(angle_between(s.e_u, Direction::from_vector(f.eigen().e_u)), 1e-12);
  EXPECT_LT(angle_between(s.e_c, Direction::from_vector(f.eigen().e_c)), 1e-12);
}

TEST(Splitting, BundlesAreInvariant) {
  const Endomorphism f(MapSpec::example4());
  const PastWord w = extend_past(f, f.spec().perturbation->q, BranchChooser::uniform(2), f.default_depth() + 5);
  const Trajectory tr(f, w, 3);
  for (int k = -3; k < 3; ++k) {
    const Mat2 D = f.derivative(tr.point(k));
    EXPECT_LT(angle_between(Direction::from_vector(D * tr.unstable(k)), Direction::from_vector(tr.unstable(k + 1))), 1e-12);
    EXPECT_LT(angle_between(Direction::from_vector(D * tr.center(k)), Direction::from_vector(tr.center(k + 1))), 1e-12);
  }
}

TEST(Splitting, CenterIgnoresThePast) {
  const Endomorphism f(MapSpec::example4());
  const TorusPoint p = wrap(0.43, 0.79);
  const Direction ref = center_direction(f, p, 60);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const PastWord w = extend_past(f, p, BranchChooser::uniform(s), 60);
    EXPECT_LT(angle_between(center_direction_via_past(f, w), ref), 1e-9);
  }
}

TEST(Splitting, UnstableDependsOnThePastForExample4) {
  const Endomorphism f(MapSpec::example4());
  const TorusPoint q = f.spec().perturbation->q;
  double spread = 0.0;
  const Direction first = unstable_direction(f, extend_past(f, q, BranchChooser::uniform(0), 60));
  for (std::uint64_t s = 1; s < 40; ++s) {
    spread = std::max(spread, angle_between(unstable_direction(f, extend_past(f, q, BranchChooser::uniform(s), 60)), first));
  }
  EXPECT_GT(spread, 1e-4);
}

TEST(Trajectory, CocycleIdentity) {
  const Endomorphism f(MapSpec::example4());
  const PastWord w = extend_past(f, wrap(0.41, 0.8), BranchChooser::uniform(5), 80);
  const Trajectory tr(f, w, 30);
  for (const Bundle b : {Bundle::center, Bundle::unstable}) {
    for (int n = 1; n < 15; ++n) {
      for (int m = 1; m < 15; ++m) {
        EXPECT_NEAR(tr.log_cocycle(b, -10, n + m), tr.log_cocycle(b, -10, n) + tr.log_cocycle(b, -10 + n, m), 1e-12);
      }
    }
    EXPECT_NEAR(tr.log_cocycle(b, 5, -5), -tr.log_cocycle(b, 0, 5), 1e-12);
  }
}

TEST(Exponents, LinearValues) {
  const ExponentEstimate a = center_exponent(Endomorphism(MapSpec::f_A()), wrap(0.31, 0.67), 100000, 0);
  EXPECT_NEAR(a.value, std::log(2.0), 1e-12);
  const Endomorphism fB(MapSpec::f_B());
  EXPECT_NEAR(center_exponent(fB, wrap(0.31, 0.67), 100000, 0).value, std::log(kLc), 1e-3);
  EXPECT_NEAR(unstable_exponent(fB, wrap(0.31, 0.67), 10000).value, std::log(kLu), 1e-9);
  EXPECT_NEAR(log_jacobian_average(fB, wrap(0.31, 0.67), 1000).value, std::log(5.0), 1e-12);
}

TEST(Exponents, Example4NearLinear) {
  const Endomorphism f(MapSpec::example4());
  const double c = center_exponent(f, wrap(0.31, 0.67), 50000, 1).value;
  const double u = unstable_exponent(f, wrap(0.31, 0.67), 50000).value;
  const double j = log_jacobian_average(f, wrap(0.31, 0.67), 50000).value;
  EXPECT_NEAR(c, std::log(kLc), 0.05);
  // for a 2x2 cocycle the exponents add up to the log-Jacobian average
  EXPECT_NEAR(c + u, j, 1e-3);
}

TEST(Lyapunov, NormRatioOracle) {
  const Endomorphism f(MapSpec::f_B());
  const LyapunovNormParams p = LyapunovNormParams::make(0.5 * std::log(kLc), 60, std::log(kLc));
  const PastWord w = extend_past(f, wrap(0.3, 0.6), BranchChooser::uniform(4), 70);
  const LyapunovNormValue v = lyapunov_norm(f, w, f.eigen().e_c * 2.0, p);
  EXPECT_NEAR(v.value / 2.0, std::sqrt(kLc / (kLc - 1.0)), 1e-6);
  EXPECT_NEAR(v.value / 2.0, 1.9021130300, 1e-8);
  EXPECT_THROW(lyapunov_norm(f, w, f.eigen().e_u, p), ConfigError);
}

TEST(Lyapunov, ParameterValidation) {
  EXPECT_THROW(LyapunovNormParams::make(0.0, 10, 0.3), ConfigError);
  EXPECT_THROW(LyapunovNormParams::make(0.4, 10, 0.3), ConfigError);
  EXPECT_THROW(LyapunovNormParams::make(0.1, 0, 0.3), ConfigError);
  const Endomorphism f(MapSpec::f_B());
  const PastWord w = extend_past(f, wrap(0.3, 0.6), BranchChooser::uniform(4), 70);
  const Trajectory tr(f, w, 0);
  // lambda this close to the exponent leaves the series far from converged at K = 10
  EXPECT_THROW(lyapunov_unit_norm(tr, 0, {0.999 * std::log(kLc), 10}), NumericalError);
}

TEST(Lyapunov, GrowthBound) {
  const Endomorphism f(MapSpec::example4());
  const LyapunovNormParams p = default_lyapunov_params(f);
  const PastWord w = extend_past(f, wrap(0.37, 0.81), BranchChooser::uniform(8), 120);
  const Trajectory tr(f, w, 60);
  for (int n = 0; n <= 50; ++n) EXPECT_GE(log_lyapunov_cocycle(tr, 0, n, p), n * p.lambda - 1e-12);
  EXPECT_LE(empirical_growth_constant(f, w, 50, p), growth_bound_sigma(f));
}

TEST(StoppingTimes, LinearClosedForms) {
  // least k with lambda_c^k (lambda_c / lambda_u)^ell >= eps
  auto expected = [](double lc, double lu, int ell) {
    return static_cast<int>(std::ceil((std::log(0.01) - ell * std::log(lc / lu)) / std::log(lc) - 1e-12));
  };
  for (const char* name : {"f_A", "f_B"}) {
    const Endomorphism f(MapSpec::preset(name));
    const LyapunovNormParams p = default_lyapunov_params(f);
    const PastWord w = extend_past(f, wrap(0.3, 0.6), BranchChooser::uniform(5), 200);
    for (int ell : {5, 20, 25}) {
      const StoppingTimeRecord r = stopping_times(f, w, wrap(0.31, 0.6), 0.01, ell, p);
      const int want = std::max(0, expected(f.eigen().lambda_c, f.eigen().lambda_u, ell));
      EXPECT_EQ(r.tau, want) << name << " ell " << ell;
      EXPECT_EQ(r.t, r.tau) << name << " ell " << ell;
      EXPECT_EQ(static_cast<int>(r.lyapunov_trace.size()), r.tau + 1);
    }
  }
}

TEST(StoppingTimes, RejectsBadInput) {
  const Endomorphism f(MapSpec::f_B());
  const LyapunovNormParams p = default_lyapunov_params(f);
  const PastWord w = extend_past(f, wrap(0.3, 0.6), BranchChooser::uniform(5), 100);
  EXPECT_THROW(stopping_times(f, w, wrap(0.31, 0.6), 1.5, 10, p), ConfigError);
  EXPECT_THROW(stopping_times(f, w, wrap(0.31, 0.6), 0.01, 200, p), ConfigError);
}

TEST(Distortion, LinearMapHasNone) {
  const Endomorphism f(MapSpec::f_B());
  const PastWord a = extend_past(f, wrap(0.3, 0.6), BranchChooser::uniform(1), 50);
  const PastWord b = extend_past(f, wrap(0.3, 0.6), BranchChooser::uniform(2), 50);
  EXPECT_NEAR(holder_distortion_probe(f, a, b, 50), 0.0, 1e-12);
  const Endomorphism e(MapSpec::example4());
  const PastWord c = extend_past(e, wrap(0.3, 0.6), BranchChooser::uniform(1), 50);
  const PastWord d = extend_past(e, wrap(0.3, 0.6), BranchChooser::uniform(2), 50);
  const auto trace = holder_distortion_trace(e, c, d, 50);
  ASSERT_EQ(trace.size(), 51u);
  for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_GE(trace[i], trace[i - 1]);
  EXPECT_LT(trace.back(), 1.0);
}
