#include <gtest/gtest.h>

#include <cmath>

#include "phlab/drift.hpp"
#include "phlab/errors.hpp"

using namespace phlab;

namespace {

DriftExperimentParams small(int count) {
  DriftExperimentParams p;
  p.count = count;
  p.seed = 3;
  return p;
}

}  // namespace

TEST(Drift, RecordsAreConsistent) {
  const Endomorphism f(MapSpec::example4());
  const DriftSummary s = drift_experiment(f, small(8));
  ASSERT_EQ(s.records.size(), 8u);
  for (const DriftRecord& r : s.records) {
    EXPECT_GE(r.ell, 15);
    EXPECT_LE(r.ell, 25);
    EXPECT_GT(r.alpha, 1.0 / 100.0);
    EXPECT_EQ(r.m, r.tau);
    EXPECT_TRUE(std::isfinite(r.center_displacement_after));
    EXPECT_GT(r.center_displacement_after, 0.0);
    // before ~ alpha d_u (lambda_c / lambda_u)^ell
    const double scale = r.alpha * r.d_u * std::pow(f.eigen().lambda_c / f.eigen().lambda_u, r.ell);
    EXPECT_GT(r.center_displacement_before, 0.1 * scale);
    EXPECT_LT(r.center_displacement_before, 10.0 * scale);
    EXPECT_GE(s.beta_hat, r.center_displacement_after / 0.01);
    EXPECT_GE(s.beta_hat, 0.01 / r.center_displacement_after);
  }
  EXPECT_NEAR(s.expected_slope, std::log(f.eigen().lambda_c / f.eigen().lambda_u), 1e-15);
}

TEST(Drift, Deterministic) {
  const Endomorphism f(MapSpec::example4());
  const DriftSummary a = drift_experiment(f, small(4)), b = drift_experiment(f, small(4));
  EXPECT_EQ(to_json(a), to_json(b));
}

TEST(Drift, SlopeTracksTheExponentGap) {
  const Endomorphism f(MapSpec::example4());
  const DriftSummary s = drift_experiment(f, small(30));
  EXPECT_NEAR(s.before_slope / s.expected_slope, 1.0, 0.15);
}

TEST(Drift, LinearMapHasNoAdmissibleConfiguration) {
  // all unstable directions coincide, so every coupling is degenerate
  DriftExperimentParams p = small(1);
  p.max_attempts = 5;
  EXPECT_THROW(drift_experiment(Endomorphism(MapSpec::f_B()), p), NumericalError);
}

TEST(Drift, YConfigurationValidation) {
  const Endomorphism f(MapSpec::example4());
  const PastWord w = extend_past(f, wrap(0.3, 0.6), BranchChooser::uniform(1), 150);
  YConfigParams p;
  EXPECT_THROW(y_configuration(f, w, w, 0.5, 0.01, 20, p), ConfigError);  // zero angle
  EXPECT_THROW(y_configuration(f, w, w, 1.5, 0.01, 20, p), ConfigError);
  EXPECT_THROW(y_configuration(f, w, w, 0.5, 0.01, 0, p), ConfigError);
}
