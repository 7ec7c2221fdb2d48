#include "phlab/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "phlab/errors.hpp"
#include "phlab/rng.hpp"

namespace phlab {

namespace {

Vec2 normalized(Vec2 v) { return v / v.norm(); }

Vec2 push_unstable(const Endomorphism& f, const PastWord& w, int from_depth, Vec2 seed) {
  Vec2 v = seed;
  for (int k = from_depth; k >= 1; --k) v = normalized(f.derivative(w.at(k)) * v);
  return v;
}

// Neumaier-compensated sum.
struct CompensatedSum {
  double sum = 0.0, c = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x)) {
      c += (sum - t) + x;
    } else {
      c += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + c; }
};

ExponentEstimate batch_mean(const std::vector<double>& xs) {
  ExponentEstimate e;
  const long n = static_cast<long>(xs.size());
  e.n = n;
  CompensatedSum total;
  for (double x : xs) total.add(x);
  e.value = total.value() / static_cast<double>(n);
  constexpr int kBatches = 10;
  double means[kBatches];
  for (int b = 0; b < kBatches; ++b) {
    const long lo = n * b / kBatches, hi = n * (b + 1) / kBatches;
    CompensatedSum s;
    for (long i = lo; i < hi; ++i) s.add(xs[static_cast<std::size_t>(i)]);
    means[b] = s.value() / static_cast<double>(hi - lo);
  }
  double mu = 0.0;
  for (double m : means) mu += m;
  mu /= kBatches;
  double var = 0.0;
  for (double m : means) var += (m - mu) * (m - mu);
  var /= (kBatches - 1);
  e.std_error = std::sqrt(var / kBatches);
  return e;
}

}  // namespace

Direction unstable_direction(const Endomorphism& f, const PastWord& w, double* residual) {
  const int depth = w.depth();
  if (depth < 10) throw ConfigError("unstable_direction: depth >= 10 required");
  const Vec2 seed = f.eigen().e_u;
  const Vec2 v = push_unstable(f, w, depth, seed);
  const Vec2 v1 = push_unstable(f, w, depth - 1, seed);
  const double res = angle_between(Direction::from_vector(v), Direction::from_vector(v1));
  if (residual) *residual = res;
  if (res > 1e-6) {
    throw NumericalError("unstable_direction: deepening moved E^u by " + std::to_string(res) +
                         " rad (domination too weak at this depth)");
  }
  return Direction::from_vector(v);
}

Direction center_direction(const Endomorphism& f, TorusPoint p, int depth, std::optional<Direction> seed,
                           double* residual) {
  if (depth < 10) throw ConfigError("center_direction: depth >= 10 required");
  std::vector<TorusPoint> orbit{p};
  orbit.reserve(static_cast<std::size_t>(depth) + 1);
  for (int k = 0; k < depth; ++k) orbit.push_back(f.evaluate(orbit.back()));
  const Vec2 s = seed ? seed->unit() : f.eigen().e_c;
  auto pull = [&](int from) {
    Vec2 v = s;
    for (int k = from - 1; k >= 0; --k) {
      v = normalized(f.derivative(orbit[static_cast<std::size_t>(k)]).inverse() * v);
    }
    return v;
  };
  const Vec2 v = pull(depth);
  const Vec2 v1 = pull(depth - 1);
  const double res = angle_between(Direction::from_vector(v), Direction::from_vector(v1));
  if (residual) *residual = res;
  if (res > 1e-6) {
    throw NumericalError("center_direction: deepening moved E^c by " + std::to_string(res) + " rad");
  }
  return Direction::from_vector(v);
}

SplittingEstimate splitting(const Endomorphism& f, const PastWord& w) {
  SplittingEstimate s;
  s.depth = w.depth();
  s.e_u = unstable_direction(f, w, &s.residual_u);
  s.e_c = center_direction(f, w.base(), std::max(10, w.depth()), std::nullopt, &s.residual_c);
  if (angle_between(s.e_u, s.e_c) <= 1e-6) {
    throw NumericalError("splitting: E^u and E^c are not transverse");
  }
  return s;
}

Direction center_direction_via_past(const Endomorphism& f, const PastWord& w, int k) {
  if (k < 0 || k > w.depth()) throw ConfigError("center_direction_via_past: k out of range");
  Vec2 v = center_direction(f, w.at(k), f.default_depth()).unit();
  for (int j = k; j >= 1; --j) v = normalized(f.derivative(w.at(j)) * v);
  return Direction::from_vector(v);
}

// ------------------------------------------------------------- Trajectory

Trajectory::Trajectory(const Endomorphism& f, const PastWord& w, int forward, int center_tail,
                       std::optional<Direction> center_seed)
    : past_(w.depth()), forward_(forward) {
  if (forward < 0) throw ConfigError("Trajectory: forward length must be >= 0");
  const int tail = center_tail < 0 ? f.default_depth() : center_tail;
  const std::size_t total = static_cast<std::size_t>(past_ + forward_ + 1);
  pts_.reserve(total);
  for (int k = past_; k >= 0; --k) pts_.push_back(w.at(k));
  for (int k = 0; k < forward_; ++k) pts_.push_back(f.evaluate(pts_.back()));

  std::vector<Mat2> df(total);
  for (std::size_t i = 0; i < total; ++i) df[i] = f.derivative(pts_[i]);

  eu_.resize(total);
  ec_.resize(total);
  eu_[0] = f.eigen().e_u;
  for (std::size_t i = 0; i + 1 < total; ++i) eu_[i + 1] = normalized(df[i] * eu_[i]);

  Vec2 v = center_seed ? center_seed->unit() : f.eigen().e_c;
  {
    std::vector<TorusPoint> ahead{pts_.back()};
    for (int k = 0; k < tail; ++k) ahead.push_back(f.evaluate(ahead.back()));
    for (int k = tail - 1; k >= 0; --k) {
      v = normalized(f.derivative(ahead[static_cast<std::size_t>(k)]).inverse() * v);
    }
  }
  ec_[total - 1] = v;
  for (std::size_t i = total - 1; i-- > 0;) ec_[i] = normalized(df[i].inverse() * ec_[i + 1]);

  nu_.resize(total - 1);
  nc_.resize(total - 1);
  lu_.resize(total - 1);
  lc_.resize(total - 1);
  su_.assign(total, 0.0);
  sc_.assign(total, 0.0);
  for (std::size_t i = 0; i + 1 < total; ++i) {
    nu_[i] = (df[i] * eu_[i]).norm();
    nc_[i] = (df[i] * ec_[i]).norm();
    lu_[i] = std::log(nu_[i]);
    lc_[i] = std::log(nc_[i]);
    su_[i + 1] = su_[i] + lu_[i];
    sc_[i + 1] = sc_[i] + lc_[i];
  }
}

double Trajectory::log_stretch(Bundle b, int k) const {
  if (k < -past_ || k >= forward_) throw ConfigError("Trajectory::log_stretch: index out of range");
  return b == Bundle::unstable ? lu_[idx(k)] : lc_[idx(k)];
}

double Trajectory::stretch(Bundle b, int k) const {
  if (k < -past_ || k >= forward_) throw ConfigError("Trajectory::stretch: index out of range");
  return b == Bundle::unstable ? nu_[idx(k)] : nc_[idx(k)];
}

double Trajectory::log_cocycle(Bundle b, int k, int n) const {
  const int lo = std::min(k, k + n), hi = std::max(k, k + n);
  if (lo < -past_ || hi > forward_) throw ConfigError("Trajectory::log_cocycle: range out of bounds");
  const auto& s = b == Bundle::unstable ? su_ : sc_;
  const double v = s[idx(hi)] - s[idx(lo)];
  return n >= 0 ? v : -v;
}

double cocycle_norm(const Endomorphism& f, const PastWord& w, Bundle b, int n) {
  const Trajectory tr(f, w, std::max(n, 0));
  // direct product keeps integer powers exact for diagonal maps
  double prod = 1.0;
  if (n >= 0) {
    for (int k = 0; k < n; ++k) prod *= tr.stretch(b, k);
  } else {
    for (int k = n; k < 0; ++k) prod /= tr.stretch(b, k);
  }
  return prod;
}

ExponentEstimate center_exponent(const Endomorphism& f, TorusPoint start, long n, std::uint64_t seed) {
  if (n < 1000) throw ConfigError("center_exponent: n >= 1000 required");
  CounterRng rng(seed);
  const Direction s = Direction::from_angle(std::numbers::pi * rng.next_double());
  const Trajectory tr(f, PastWord(start), static_cast<int>(n), -1, s);
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (long k = 0; k < n; ++k) xs[static_cast<std::size_t>(k)] = tr.log_stretch(Bundle::center, static_cast<int>(k));
  return batch_mean(xs);
}

ExponentEstimate unstable_exponent(const Endomorphism& f, TorusPoint start, long n) {
  if (n < 1000) throw ConfigError("unstable_exponent: n >= 1000 required");
  const Trajectory tr(f, PastWord(start), static_cast<int>(n), 10);
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (long k = 0; k < n; ++k) xs[static_cast<std::size_t>(k)] = tr.log_stretch(Bundle::unstable, static_cast<int>(k));
  return batch_mean(xs);
}

ExponentEstimate log_jacobian_average(const Endomorphism& f, TorusPoint start, long n) {
  std::vector<double> xs(static_cast<std::size_t>(n));
  TorusPoint p = start;
  for (long k = 0; k < n; ++k) {
    xs[static_cast<std::size_t>(k)] = std::log(std::fabs(f.derivative(p).det()));
    p = f.evaluate(p);
  }
  return batch_mean(xs);
}

nlohmann::json to_json(const ExponentEstimate& e) {
  return {{"value", e.value}, {"n", e.n}, {"stderr", e.std_error}};
}

nlohmann::json to_json(const SplittingEstimate& s) {
  return {{"e_u_theta", s.e_u.theta()},
          {"e_c_theta", s.e_c.theta()},
          {"depth", s.depth},
          {"residual_u", s.residual_u},
          {"residual_c", s.residual_c}};
}

}  // namespace phlab
