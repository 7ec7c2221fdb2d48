#include "phlab/lyapunov.hpp"

#include <algorithm>
#include <cmath>

#include "phlab/errors.hpp"

namespace phlab {

LyapunovNormParams LyapunovNormParams::make(double lambda, int truncation_k, double estimate) {
  if (!(lambda > 0.0)) throw ConfigError("Lyapunov norm: lambda must be positive");
  if (!(lambda < estimate)) {
    throw ConfigError("Lyapunov norm: lambda = " + std::to_string(lambda) +
                      " must be below the center exponent estimate " + std::to_string(estimate));
  }
  if (truncation_k < 1) throw ConfigError("Lyapunov norm: truncation K >= 1 required");
  return {lambda, truncation_k};
}

LyapunovNormParams default_lyapunov_params(const Endomorphism& f, int truncation_k) {
  const double est = center_exponent(f, wrap(0.1234567, 0.7654321), 10000, 0).value;
  return LyapunovNormParams::make(0.5 * est, truncation_k, est);
}

LyapunovNormValue lyapunov_unit_norm(const Trajectory& tr, int k, const LyapunovNormParams& p) {
  const int K = p.truncation_k;
  if (k - K < -tr.past()) {
    throw ConfigError("Lyapunov norm: truncation K = " + std::to_string(K) + " exceeds the available past");
  }
  double sum = 0.0, term = 0.0;
  double log_term = 0.0;  // log of lambda^c_{x_{k-j}}(j)^{-2} e^{2 j lambda}
  for (int j = 0; j <= K; ++j) {
    term = std::exp(log_term);
    sum += term;
    if (j < K) log_term += -2.0 * tr.log_stretch(Bundle::center, k - j - 1) + 2.0 * p.lambda;
  }
  LyapunovNormValue v{std::sqrt(sum), term / sum};
  if (v.last_term_fraction > 1e-3) {
    throw NumericalError("Lyapunov norm: series not converged (last term fraction " +
                         std::to_string(v.last_term_fraction) + "), lambda too close to the center exponent");
  }
  return v;
}

LyapunovNormValue lyapunov_norm(const Endomorphism& f, const PastWord& w, TangentVector v,
                                const LyapunovNormParams& p) {
  if (p.truncation_k > w.depth()) throw ConfigError("Lyapunov norm: truncation K exceeds word depth");
  const Trajectory tr(f, w, 0);
  const double vn = v.norm();
  if (vn == 0.0) return {0.0, 0.0};
  if (angle_between(Direction::from_vector(v), Direction::from_vector(tr.center(0))) > 1e-6) {
    throw ConfigError("Lyapunov norm: vector does not lie in E^c");
  }
  LyapunovNormValue n = lyapunov_unit_norm(tr, 0, p);
  n.value *= vn;
  return n;
}

double log_lyapunov_cocycle(const Trajectory& tr, int k, int n, const LyapunovNormParams& p) {
  if (n < 0) throw ConfigError("Lyapunov cocycle: n >= 0 required");
  return tr.log_cocycle(Bundle::center, k, n) + std::log(lyapunov_unit_norm(tr, k + n, p).value) -
         std::log(lyapunov_unit_norm(tr, k, p).value);
}

double lyapunov_cocycle(const Endomorphism& f, const PastWord& w, int n, const LyapunovNormParams& p) {
  if (p.truncation_k > w.depth()) throw ConfigError("Lyapunov cocycle: truncation K exceeds word depth");
  const Trajectory tr(f, w, n);
  return std::exp(log_lyapunov_cocycle(tr, 0, n, p));
}

StoppingTimeRecord stopping_times(const Endomorphism& f, const PastWord& x_word, const PastWord& xu_word,
                                  double epsilon, int ell, const LyapunovNormParams& p, int cap) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("stopping_times: epsilon must lie in (0,1)");
  if (ell < 0 || ell > x_word.depth()) throw ConfigError("stopping_times: ell exceeds the word depth");
  if (p.truncation_k > x_word.depth() || p.truncation_k > xu_word.depth()) {
    throw ConfigError("stopping_times: truncation K exceeds word depth");
  }
  const double slack = std::log1p(-1e-12);
  const double log_eps = std::log(epsilon);
  for (int horizon = 64;; horizon *= 2) {
    const int h = std::min(horizon, cap + 1);
    const Trajectory tx(f, x_word, h);
    const Trajectory txu(f, xu_word, h);
    const double base = tx.log_cocycle(Bundle::center, -ell, ell) - tx.log_cocycle(Bundle::unstable, -ell, ell);
    std::vector<double> trace;
    int tau = -1;
    for (int k = 0; k <= h; ++k) {
      const double l = log_lyapunov_cocycle(txu, 0, k, p);
      trace.push_back(std::exp(l));
      if (l + base - log_eps >= slack) {
        tau = k;
        break;
      }
    }
    if (tau >= 0) {
      const double target = std::log(trace.back());
      for (int n = 0; n <= h; ++n) {
        if (log_lyapunov_cocycle(tx, 0, n, p) - target >= slack) {
          return {tau, n, epsilon, ell, std::move(trace)};
        }
      }
    }
    if (h > cap) {
      throw NumericalError("stopping_times: stopping time exceeds the cap " + std::to_string(cap));
    }
  }
}

StoppingTimeRecord stopping_times(const Endomorphism& f, const PastWord& x_word, TorusPoint x_u,
                                  double epsilon, int ell, const LyapunovNormParams& p, int cap) {
  return stopping_times(f, x_word, match_past(f, x_word, x_u), epsilon, ell, p, cap);
}

std::vector<double> holder_distortion_trace(const Endomorphism& f, const PastWord& w1, const PastWord& w2,
                                            int n) {
  if (n > w1.depth() || n > w2.depth()) throw ConfigError("holder probe: n exceeds word depth");
  const Trajectory t1(f, w1, 1), t2(f, w2, 1);
  std::vector<double> trace{0.0};
  double sum = 0.0, sup = 0.0;
  for (int l = 0; l < n; ++l) {
    sum += t1.log_stretch(Bundle::center, -l) - t2.log_stretch(Bundle::center, -l);
    sup = std::max(sup, std::fabs(sum));
    trace.push_back(sup);
  }
  return trace;
}

double holder_distortion_probe(const Endomorphism& f, const PastWord& w1, const PastWord& w2, int n) {
  return holder_distortion_trace(f, w1, w2, n).back();
}

double growth_bound_sigma(const Endomorphism& f) { return 7.0 * f.max_log_derivative_norm(64); }

double empirical_growth_constant(const Endomorphism& f, const PastWord& w, int n, const LyapunovNormParams& p) {
  const Trajectory tr(f, w, n);
  double best = -INFINITY;
  for (int k = 0; k < n; ++k) best = std::max(best, log_lyapunov_cocycle(tr, k, 1, p));
  return best;
}

nlohmann::json to_json(const StoppingTimeRecord& r) {
  return {{"tau", r.tau}, {"t", r.t}, {"epsilon", r.epsilon}, {"ell", r.ell}, {"lyapunov_trace", r.lyapunov_trace}};
}

}  // namespace phlab
