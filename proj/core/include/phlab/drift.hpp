#pragma once

#include <cstdint>
#include <json.hpp>
#include <vector>

#include "phlab/lyapunov.hpp"
#include "phlab/natural_extension.hpp"

namespace phlab {

struct DriftRecord {
  int ell = 0;
  int tau = 0;
  int t = 0;
  int m = 0;
  double alpha = 0.0;  // angle between E^u(x~_{-ell}) and E^u(y~_{-ell})
  double d_u = 0.0;
  double center_displacement_before = 0.0;
  double center_displacement_after = 0.0;
};

struct YConfigParams {
  double beta = 100.0;
  int chart_depth = 60;
  LyapunovNormParams lyapunov;  // lambda <= 0 selects default_lyapunov_params
};

// x_word and y_word must share the point at level ell and the E^u directions there must make
// an angle above 1/beta; throws ConfigError otherwise. x^u is the point of W^u(x~) reached by
// an unstable displacement d_u in (1/beta, 1) applied at level ell and pushed forward.
// before is |R^c_{x~^u}(y~^u)|, after is |R^c_{x~^u_m}(y~^u_m)| with m = tau.
DriftRecord y_configuration(const Endomorphism& f, const PastWord& x_word, const PastWord& y_word, double d_u,
                            double epsilon, int ell, const YConfigParams& params);

struct DriftExperimentParams {
  int count = 100;
  int ell_min = 15;
  int ell_max = 25;
  double epsilon = 0.01;
  double d_u_min = 0.1;
  double d_u_max = 0.9;
  int max_attempts = 1000;  // per configuration
  std::uint64_t seed = 0;
  YConfigParams config;
};

struct DriftSummary {
  std::vector<DriftRecord> records;
  long rejected = 0;
  // smallest b with every after-displacement in [epsilon / b, epsilon * b]
  double beta_hat = 0.0;
  double before_slope = 0.0;  // least-squares slope of log(before) against ell
  double expected_slope = 0.0;
};

// Configurations are rooted at b = f(z) for z drawn in the perturbation support, so the
// x-past passes through z and the y-past through another preimage of b.
DriftSummary drift_experiment(const Endomorphism& f, const DriftExperimentParams& p);

nlohmann::json to_json(const DriftRecord& r);
nlohmann::json to_json(const DriftSummary& s);

}  // namespace phlab
