#pragma once

// Bump profiles of the perturbation phi(u, c) = (u, c + eps * a * psi1(u/a) * psi2(c/a)).
//
// psi1 is odd, equals 2s on [-1/2, 1/2] and vanishes outside [-1, 1]; on [1/2, 1] it is the
// quintic Hermite connector from (value 1, slope 2, curvature 0) to (0, 0, 0), which in the
// local variable t = 2s - 1 reads 1 + t - 16t^3 + 23t^4 - 9t^5.
// psi2 is even, equals 1 on [-1/2, 1/2], and on [1/2, 1] is the smoothstep 1 - 10t^3 + 15t^4 - 6t^5.
// Both are C^2.
namespace phlab::bump {

double psi1(double s);
double dpsi1(double s);
double psi2(double s);
double dpsi2(double s);

// psi(s + h) - psi(s) without cancellation when h is tiny.
double psi1_delta(double s, double h);
double psi2_delta(double s, double h);

}  // namespace phlab::bump
