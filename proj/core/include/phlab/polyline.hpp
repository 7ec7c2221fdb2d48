#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "phlab/maps.hpp"
#include "phlab/torus.hpp"

namespace phlab {

// Curve stored as lifted points in R^2 with signed arclength, s[base_index] = 0.
struct Polyline {
  std::vector<Vec2> pts;
  std::vector<double> s;
  int base_index = 0;

  static Polyline from_points(std::vector<Vec2> pts, int base_index);
  void recompute_arclength();

  std::size_t size() const { return pts.size(); }
  double s_min() const { return s.front(); }
  double s_max() const { return s.back(); }
  double length() const { return s.back() - s.front(); }
  double max_segment() const;
  Vec2 base_point() const { return pts[static_cast<std::size_t>(base_index)]; }
  TorusPoint torus_point(std::size_t i) const { return TorusPoint::wrap(pts[i]); }

  // Segment index i with s[i] <= sv <= s[i+1]; clamps to the ends.
  std::size_t segment_at(double sv) const;
  // Linear interpolation by arclength; throws ConfigError outside [s_min, s_max].
  Vec2 point_at(double sv) const;
  // Restriction to [lo, hi] with interpolated endpoints; the base vertex is kept.
  Polyline trimmed(double lo, double hi) const;
  // Subdivides every segment longer than max_segment.
  Polyline resampled(double max_segment) const;
};

double point_polyline_distance(Vec2 p, const Polyline& c);
// Symmetric Hausdorff distance of the vertex sets to the opposite polylines, after shifting
// b by the integer vector that brings its base next to the base of a.
double hausdorff_distance(const Polyline& a, const Polyline& b);

// Splits the lifted segment a -> b over the half-open n x n cells of the torus and calls
// visit(i, j, length) for every piece of positive length, in order along the segment.
template <class Visit>
void rasterize_segment(Vec2 a, Vec2 b, int n, Visit&& visit) {
  const double len = (b - a).norm();
  if (!(len > 0.0)) return;
  const double ax = a.x * n, ay = a.y * n;
  const double dx = b.x * n - ax, dy = b.y * n - ay;
  std::int64_t ix = static_cast<std::int64_t>(std::floor(ax));
  std::int64_t iy = static_cast<std::int64_t>(std::floor(ay));
  constexpr double inf = std::numeric_limits<double>::infinity();
  const int sx = dx > 0.0 ? 1 : (dx < 0.0 ? -1 : 0);
  const int sy = dy > 0.0 ? 1 : (dy < 0.0 ? -1 : 0);
  const double tdx = sx != 0 ? 1.0 / std::fabs(dx) : inf;
  const double tdy = sy != 0 ? 1.0 / std::fabs(dy) : inf;
  double tmx = sx > 0 ? (static_cast<double>(ix + 1) - ax) / dx : (sx < 0 ? (ax - static_cast<double>(ix)) / -dx : inf);
  double tmy = sy > 0 ? (static_cast<double>(iy + 1) - ay) / dy : (sy < 0 ? (ay - static_cast<double>(iy)) / -dy : inf);
  const std::int64_t nn = n;
  double t = 0.0;
  for (;;) {
    const double tn = std::fmin(std::fmin(tmx, tmy), 1.0);
    if (tn > t) {
      const int ci = static_cast<int>(((ix % nn) + nn) % nn);
      const int cj = static_cast<int>(((iy % nn) + nn) % nn);
      visit(ci, cj, (tn - t) * len);
      t = tn;
    }
    if (tn >= 1.0) break;
    if (tmx <= tmy) {
      ix += sx;
      tmx += tdx;
    } else {
      iy += sy;
      tmy += tdy;
    }
  }
}

// Cuts a -> b into pieces of length <= 1 whose endpoints are computed directly, so the
// incremental stepping of rasterize_segment never runs over a long segment.
template <class Visit>
void for_each_piece(Vec2 a, Vec2 b, Visit&& visit) {
  const int m = std::max(1, static_cast<int>(std::ceil((b - a).norm())));
  Vec2 prev = a;
  for (int k = 1; k <= m; ++k) {
    const Vec2 next = k == m ? b : a + (b - a) * (static_cast<double>(k) / m);
    visit(prev, next);
    prev = next;
  }
}

// Image of a lifted vertex chain under the lift of f. Each segment is first subdivided to
// pieces of length <= max_segment: everywhere if refine_all, otherwise only on the parts
// where f is not affine (elsewhere the image of a segment is exactly a segment).
std::vector<Vec2> push_vertices(const Endomorphism& f, const std::vector<Vec2>& pts, double max_segment,
                                bool refine_all);

}  // namespace phlab
