#pragma once

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <vector>

#include "phlab/maps.hpp"
#include "phlab/natural_extension.hpp"

namespace phlab {

enum class Bundle { center, unstable };

struct SplittingEstimate {
  Direction e_u;
  Direction e_c;
  int depth = 0;
  double residual_u = 0.0;  // projective change over the last deepening step
  double residual_c = 0.0;
};

// E^u at the base: a seed direction pushed forward from x_{-depth}. Requires depth >= 10;
// throws NumericalError if the last deepening step moves the direction by more than 1e-6.
Direction unstable_direction(const Endomorphism& f, const PastWord& w, double* residual = nullptr);
// E^c at p: a seed direction pulled back along the forward orbit of length depth.
Direction center_direction(const Endomorphism& f, TorusPoint p, int depth,
                           std::optional<Direction> seed = std::nullopt, double* residual = nullptr);
SplittingEstimate splitting(const Endomorphism& f, const PastWord& w);
// E^c at the base read through the past: E^c(x_{-k}) pushed forward by Df^k(x_{-k}).
// The push-forward amplifies errors by (lambda_u/lambda_c)^k, so keep k small.
Direction center_direction_via_past(const Endomorphism& f, const PastWord& w, int k = 8);

// Cocycle data along x_{-past}, ..., x_0, ..., x_{forward}. E^u is pushed from the deepest
// point, E^c pulled back from f^{center_tail}(x_forward). Indices k run over [-past, forward].
class Trajectory {
 public:
  Trajectory(const Endomorphism& f, const PastWord& w, int forward, int center_tail = -1,
             std::optional<Direction> center_seed = std::nullopt);

  int past() const { return past_; }
  int forward() const { return forward_; }
  TorusPoint point(int k) const { return pts_[idx(k)]; }
  Vec2 unstable(int k) const { return eu_[idx(k)]; }
  Vec2 center(int k) const { return ec_[idx(k)]; }
  // log ||Df(x_k)|E||, defined for k in [-past, forward - 1].
  double log_stretch(Bundle b, int k) const;
  double stretch(Bundle b, int k) const;
  // log lambda^*_{x_k}(n); negative n runs backward from x_k.
  double log_cocycle(Bundle b, int k, int n) const;

 private:
  std::size_t idx(int k) const { return static_cast<std::size_t>(k + past_); }
  int past_ = 0;
  int forward_ = 0;
  std::vector<TorusPoint> pts_;
  std::vector<Vec2> eu_, ec_;
  std::vector<double> nu_, nc_;  // stretches
  std::vector<double> lu_, lc_;  // their logs
  std::vector<double> su_, sc_;  // prefix sums of the logs
};

// lambda^*_{x~}(n) along the word's orbit.
double cocycle_norm(const Endomorphism& f, const PastWord& w, Bundle b, int n);

struct ExponentEstimate {
  double value = 0.0;
  long n = 0;
  double std_error = 0.0;
};

// Birkhoff average of log center stretch; seed picks the pullback seed direction.
ExponentEstimate center_exponent(const Endomorphism& f, TorusPoint start, long n, std::uint64_t seed);
// E^u is seeded with the linear eigendirection at the start; the seed error decays geometrically.
ExponentEstimate unstable_exponent(const Endomorphism& f, TorusPoint start, long n);
// Birkhoff average of log |det Df| along the same orbit.
ExponentEstimate log_jacobian_average(const Endomorphism& f, TorusPoint start, long n);

nlohmann::json to_json(const ExponentEstimate& e);
nlohmann::json to_json(const SplittingEstimate& s);

}  // namespace phlab
