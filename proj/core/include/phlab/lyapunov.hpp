#pragma once

#include <cstdint>
#include <json.hpp>
#include <vector>

#include "phlab/splitting.hpp"

namespace phlab {

struct LyapunovNormParams {
  double lambda = 0.0;
  int truncation_k = 40;

  // Throws ConfigError unless 0 < lambda < center_exponent_estimate and K >= 1.
  static LyapunovNormParams make(double lambda, int truncation_k, double center_exponent_estimate);
};

// lambda = 0.5 x a center-exponent estimate from a 10^4-step orbit.
LyapunovNormParams default_lyapunov_params(const Endomorphism& f, int truncation_k = 40);

struct LyapunovNormValue {
  double value = 0.0;
  double last_term_fraction = 0.0;
};

// Norm of the unit center vector at x_k: sqrt(sum_{j=0..K} lambda^c_{x_{k-j}}(j)^{-2} e^{2 j lambda}).
// Needs k - K >= -past. Throws NumericalError when the last term exceeds 1e-3 of the total.
LyapunovNormValue lyapunov_unit_norm(const Trajectory& tr, int k, const LyapunovNormParams& p);
// v must lie in E^c(x_0) within 1e-6 rad.
LyapunovNormValue lyapunov_norm(const Endomorphism& f, const PastWord& w, TangentVector v,
                                const LyapunovNormParams& p);
// log of lambda-hat^c at x_k over n >= 0 steps.
double log_lyapunov_cocycle(const Trajectory& tr, int k, int n, const LyapunovNormParams& p);
double lyapunov_cocycle(const Endomorphism& f, const PastWord& w, int n, const LyapunovNormParams& p);

struct StoppingTimeRecord {
  int tau = 0;
  int t = 0;
  double epsilon = 0.0;
  int ell = 0;
  // lambda-hat^c_{x^u}(k) for k = 0..tau
  std::vector<double> lyapunov_trace;
};

// tau: least k with lambda-hat^c_{x^u}(k) lambda^c_{x_{-ell}}(ell) / lambda^u_{x_{-ell}}(ell) >= eps.
// t: least n with lambda-hat^c_x(n) / lambda-hat^c_{x^u}(tau) >= 1.
// Both comparisons allow a relative slack of 1e-12. xu_word is the past of x^u on W^u(x~).
StoppingTimeRecord stopping_times(const Endomorphism& f, const PastWord& x_word, const PastWord& xu_word,
                                  double epsilon, int ell, const LyapunovNormParams& p, int cap = 10000);
StoppingTimeRecord stopping_times(const Endomorphism& f, const PastWord& x_word, TorusPoint x_u,
                                  double epsilon, int ell, const LyapunovNormParams& p, int cap = 10000);

// Running supremum over l <= n of |sum_{i<l} phi(x_{-i}) - phi(y_{-i})|, phi = log ||Df|E^c||.
// Entry l of the trace is the value at n = l.
std::vector<double> holder_distortion_trace(const Endomorphism& f, const PastWord& w1, const PastWord& w2,
                                            int n);
double holder_distortion_probe(const Endomorphism& f, const PastWord& w1, const PastWord& w2, int n);

// 7 x max log ||Df||, the a priori growth bound.
double growth_bound_sigma(const Endomorphism& f);
// max over k < n of log lambda-hat^c_{x_k}(1): the observed one-step growth rate.
double empirical_growth_constant(const Endomorphism& f, const PastWord& w, int n, const LyapunovNormParams& p);

nlohmann::json to_json(const StoppingTimeRecord& r);

}  // namespace phlab
