#pragma once

#include <cmath>

namespace phlab {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(Vec2 o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;

  constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
  constexpr double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  double norm_inf() const { return std::fmax(std::fabs(x), std::fabs(y)); }
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }

// Tangent vectors live in the standard flat chart.
using TangentVector = Vec2;

// Row-major [[a b] [c d]].
struct Mat2 {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  constexpr Vec2 operator*(Vec2 v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
  constexpr Mat2 operator*(const Mat2& m) const {
    return {a * m.a + b * m.c, a * m.b + b * m.d, c * m.a + d * m.c, c * m.b + d * m.d};
  }
  constexpr Mat2 operator-(const Mat2& m) const { return {a - m.a, b - m.b, c - m.c, d - m.d}; }
  constexpr bool operator==(const Mat2&) const = default;
  constexpr double det() const { return a * d - b * c; }
  constexpr double trace() const { return a + d; }
  Mat2 inverse() const;
  double max_abs_entry() const;
  // Largest and smallest singular values.
  double operator_norm() const;
  double min_stretch() const;
};

class TorusPoint {
 public:
  constexpr TorusPoint() = default;

  // Reduces modulo 1 into [0,1); throws ConfigError on non-finite input.
  static TorusPoint wrap(double raw_x, double raw_y);
  static TorusPoint wrap(Vec2 v) { return wrap(v.x, v.y); }

  double x() const { return x_; }
  double y() const { return y_; }
  Vec2 coords() const { return {x_, y_}; }

  // Exact coordinate equality; use approx_equal for tolerant comparison.
  bool operator==(const TorusPoint&) const = default;

 private:
  constexpr TorusPoint(double x, double y) : x_(x), y_(y) {}
  double x_ = 0.0;
  double y_ = 0.0;
};

TorusPoint wrap(double raw_x, double raw_y);
double wrap_coordinate(double v);

// Shortest representative of p - q, components in [-1/2, 1/2].
Vec2 lift_difference(TorusPoint p, TorusPoint q);
double torus_distance(TorusPoint p, TorusPoint q);
bool approx_equal(TorusPoint p, TorusPoint q, double tol = 1e-12);
// The lift of p closest to the reference point in R^2.
Vec2 nearest_lift(TorusPoint p, Vec2 reference);

class Direction {
 public:
  constexpr Direction() = default;
  static Direction from_angle(double theta);
  // Throws ConfigError on the zero vector.
  static Direction from_vector(Vec2 v);
  static Direction from_slope(double slope) { return from_vector({1.0, slope}); }

  double theta() const { return theta_; }
  Vec2 unit() const { return {std::cos(theta_), std::sin(theta_)}; }
  // Infinite for the vertical direction.
  double slope() const;

 private:
  explicit constexpr Direction(double theta) : theta_(theta) {}
  double theta_ = 0.0;
};

// Projective angle in [0, pi/2].
double angle_between(Direction a, Direction b);
bool approx_equal(Direction a, Direction b, double tol = 1e-9);
// Unit vector along d, sign chosen to have non-negative dot product with hint.
Vec2 oriented_unit(Direction d, Vec2 hint);

}  // namespace phlab
