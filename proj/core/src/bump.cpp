#include "phlab/bump.hpp"

#include <array>
#include <cmath>

namespace phlab::bump {

namespace {

using Poly = std::array<double, 6>;

constexpr Poly kConnector = {1.0, 1.0, 0.0, -16.0, 23.0, -9.0};
constexpr Poly kSmoothstep = {1.0, 0.0, 0.0, -10.0, 15.0, -6.0};

double horner(const Poly& p, double t) {
  double r = p[5];
  for (int i = 4; i >= 0; --i) r = r * t + p[i];
  return r;
}

double horner_prime(const Poly& p, double t) {
  double r = 5.0 * p[5];
  for (int i = 4; i >= 1; --i) r = r * t + i * p[i];
  return r;
}

// p(t + dt) - p(t) via q_i = ((t+dt)^i - t^i)/dt, q_i = (t+dt) q_{i-1} + t^{i-1}.
double poly_delta(const Poly& p, double t, double dt) {
  const double t1 = t + dt;
  double q = 1.0;
  double tp = 1.0;
  double acc = p[1];
  for (int i = 2; i <= 5; ++i) {
    tp *= t;
    q = t1 * q + tp;
    acc += p[i] * q;
  }
  return dt * acc;
}

// Piece index: 0 (s <= -1), 1 [-1,-1/2], 2 [-1/2,1/2], 3 [1/2,1], 4 (s >= 1).
int piece_of(double s) {
  if (s <= -1.0) return 0;
  if (s < -0.5) return 1;
  if (s <= 0.5) return 2;
  if (s < 1.0) return 3;
  return 4;
}

// Delta over [s, s + h] inside one piece, classified by the midpoint.
double psi1_piece_delta(double s, double h) {
  switch (piece_of(s + 0.5 * h)) {
    case 1:
      return -poly_delta(kConnector, -2.0 * s - 1.0, -2.0 * h);
    case 2:
      return 2.0 * h;
    case 3:
      return poly_delta(kConnector, 2.0 * s - 1.0, 2.0 * h);
    default:
      return 0.0;
  }
}

double psi2_piece_delta(double s, double h) {
  switch (piece_of(s + 0.5 * h)) {
    case 1:
      return poly_delta(kSmoothstep, -2.0 * s - 1.0, -2.0 * h);
    case 3:
      return poly_delta(kSmoothstep, 2.0 * s - 1.0, 2.0 * h);
    default:
      return 0.0;
  }
}

template <typename PieceDelta>
double split_delta(double s, double h, PieceDelta piece) {
  if (h == 0.0) return 0.0;
  static constexpr std::array<double, 4> knots = {-1.0, -0.5, 0.5, 1.0};
  const double lo = h > 0.0 ? s : s + h;
  const double hi = h > 0.0 ? s + h : s;
  double sum = 0.0;
  double a = s;
  // walk from s toward s + h, cutting at interior knots
  if (h > 0.0) {
    for (double k : knots) {
      if (k > lo && k < hi) {
        sum += piece(a, k - a);
        a = k;
      }
    }
  } else {
    for (auto it = knots.rbegin(); it != knots.rend(); ++it) {
      const double k = *it;
      if (k > lo && k < hi) {
        sum += piece(a, k - a);
        a = k;
      }
    }
  }
  const double rest = (a == s) ? h : (s + h) - a;
  return sum + piece(a, rest);
}

}  // namespace

double psi1(double s) {
  switch (piece_of(s)) {
    case 1:
      return -horner(kConnector, -2.0 * s - 1.0);
    case 2:
      return 2.0 * s;
    case 3:
      return horner(kConnector, 2.0 * s - 1.0);
    default:
      return 0.0;
  }
}

double dpsi1(double s) {
  switch (piece_of(s)) {
    case 1:
      return 2.0 * horner_prime(kConnector, -2.0 * s - 1.0);
    case 2:
      return 2.0;
    case 3:
      return 2.0 * horner_prime(kConnector, 2.0 * s - 1.0);
    default:
      return 0.0;
  }
}

double psi2(double s) {
  switch (piece_of(s)) {
    case 1:
      return horner(kSmoothstep, -2.0 * s - 1.0);
    case 2:
      return 1.0;
    case 3:
      return horner(kSmoothstep, 2.0 * s - 1.0);
    default:
      return 0.0;
  }
}

double dpsi2(double s) {
  switch (piece_of(s)) {
    case 1:
      return -2.0 * horner_prime(kSmoothstep, -2.0 * s - 1.0);
    case 3:
      return 2.0 * horner_prime(kSmoothstep, 2.0 * s - 1.0);
    default:
      return 0.0;
  }
}

double psi1_delta(double s, double h) { return split_delta(s, h, psi1_piece_delta); }
double psi2_delta(double s, double h) { return split_delta(s, h, psi2_piece_delta); }

}  // namespace phlab::bump
