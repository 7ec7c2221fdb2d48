#include "phlab/torus.hpp"

#include <numbers>

#include "phlab/errors.hpp"

namespace phlab {

Mat2 Mat2::inverse() const {
  const double dt = det();
  if (dt == 0.0) throw NumericalError("singular 2x2 matrix");
  return {d / dt, -b / dt, -c / dt, a / dt};
}

double Mat2::max_abs_entry() const {
  return std::fmax(std::fmax(std::fabs(a), std::fabs(b)), std::fmax(std::fabs(c), std::fabs(d)));
}

namespace {
// Singular values from the Frobenius norm and determinant.
void singular_values(const Mat2& m, double& smax, double& smin) {
  const double f = m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d;
  const double dt = std::fabs(m.det());
  const double disc = std::sqrt(std::fmax(0.0, (f - 2.0 * dt) * (f + 2.0 * dt)));
  const double s2max = 0.5 * (f + disc);
  smax = std::sqrt(s2max);
  smin = s2max > 0.0 ? dt / smax : 0.0;
}
}  // namespace

double Mat2::operator_norm() const {
  double hi, lo;
  singular_values(*this, hi, lo);
  return hi;
}

double Mat2::min_stretch() const {
  double hi, lo;
  singular_values(*this, hi, lo);
  return lo;
}

double wrap_coordinate(double v) {
  double r = v - std::floor(v);
  if (r >= 1.0) r = 0.0;  // tiny negative inputs round up to 1
  if (r == 0.0) r = 0.0;  // clears -0.0
  return r;
}

TorusPoint TorusPoint::wrap(double raw_x, double raw_y) {
  if (!std::isfinite(raw_x) || !std::isfinite(raw_y)) {
    throw ConfigError("wrap: non-finite coordinate");
  }
  return TorusPoint(wrap_coordinate(raw_x), wrap_coordinate(raw_y));
}

TorusPoint wrap(double raw_x, double raw_y) { return TorusPoint::wrap(raw_x, raw_y); }

Vec2 lift_difference(TorusPoint p, TorusPoint q) {
  double dx = p.x() - q.x();
  double dy = p.y() - q.y();
  dx -= std::round(dx);
  dy -= std::round(dy);
  return {dx, dy};
}

double torus_distance(TorusPoint p, TorusPoint q) { return lift_difference(p, q).norm(); }

bool approx_equal(TorusPoint p, TorusPoint q, double tol) { return torus_distance(p, q) <= tol; }

Vec2 nearest_lift(TorusPoint p, Vec2 reference) {
  return {p.x() - std::round(p.x() - reference.x), p.y() - std::round(p.y() - reference.y)};
}

Direction Direction::from_angle(double theta) {
  if (!std::isfinite(theta)) throw ConfigError("direction: non-finite angle");
  constexpr double pi = std::numbers::pi;
  double t = std::fmod(theta, pi);
  if (t < 0.0) t += pi;
  if (t >= pi) t = 0.0;
  if (t == 0.0) t = 0.0;
  return Direction(t);
}

Direction Direction::from_vector(Vec2 v) {
  if (!(v.x != 0.0 || v.y != 0.0) || !std::isfinite(v.x) || !std::isfinite(v.y)) {
    throw ConfigError("direction: zero or non-finite vector");
  }
  return from_angle(std::atan2(v.y, v.x));
}

double Direction::slope() const {
  const double c = std::cos(theta_);
  if (std::fabs(c) < 1e-16) return INFINITY;  // cos(pi/2) rounds to 6e-17
  return std::tan(theta_);
}

double angle_between(Direction a, Direction b) {
  const double d = std::fabs(a.theta() - b.theta());
  return std::fmin(d, std::numbers::pi - d);
}

bool approx_equal(Direction a, Direction b, double tol) { return angle_between(a, b) <= tol; }

Vec2 oriented_unit(Direction d, Vec2 hint) {
  const Vec2 u = d.unit();
  return u.dot(hint) < 0.0 ? -u : u;
}

}  // namespace phlab
