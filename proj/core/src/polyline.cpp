#include "phlab/polyline.hpp"

#include <algorithm>

#include "phlab/errors.hpp"
#include "phlab/parallel.hpp"

namespace phlab {

Polyline Polyline::from_points(std::vector<Vec2> pts, int base_index) {
  if (pts.empty()) throw ConfigError("Polyline: empty point list");
  if (base_index < 0 || base_index >= static_cast<int>(pts.size())) {
    throw ConfigError("Polyline: base index out of range");
  }
  Polyline p;
  p.pts = std::move(pts);
  p.base_index = base_index;
  p.recompute_arclength();
  return p;
}

void Polyline::recompute_arclength() {
  s.assign(pts.size(), 0.0);
  const auto b = static_cast<std::size_t>(base_index);
  for (std::size_t i = b + 1; i < pts.size(); ++i) s[i] = s[i - 1] + (pts[i] - pts[i - 1]).norm();
  for (std::size_t i = b; i-- > 0;) s[i] = s[i + 1] - (pts[i + 1] - pts[i]).norm();
}

double Polyline::max_segment() const {
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) m = std::max(m, (pts[i + 1] - pts[i]).norm());
  return m;
}

std::size_t Polyline::segment_at(double sv) const {
  if (pts.size() < 2) return 0;
  auto it = std::upper_bound(s.begin(), s.end(), sv);
  std::size_t i = it == s.begin() ? 0 : static_cast<std::size_t>(it - s.begin()) - 1;
  return std::min(i, pts.size() - 2);
}

Vec2 Polyline::point_at(double sv) const {
  if (sv < s.front() - 1e-15 || sv > s.back() + 1e-15) throw ConfigError("Polyline::point_at: outside the curve");
  if (pts.size() == 1) return pts[0];
  const std::size_t i = segment_at(sv);
  const double ds = s[i + 1] - s[i];
  const double t = ds > 0.0 ? std::clamp((sv - s[i]) / ds, 0.0, 1.0) : 0.0;
  return pts[i] + (pts[i + 1] - pts[i]) * t;
}

Polyline Polyline::trimmed(double lo, double hi) const {
  if (!(lo <= 0.0 && hi >= 0.0)) throw ConfigError("Polyline::trimmed: range must contain the base");
  lo = std::max(lo, s.front());
  hi = std::min(hi, s.back());
  std::vector<Vec2> out;
  int base = 0;
  if (s.front() < lo) out.push_back(point_at(lo));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (s[i] < lo || s[i] > hi) continue;
    if (static_cast<int>(i) == base_index) base = static_cast<int>(out.size());
    if (!out.empty() && out.back() == pts[i]) continue;
    out.push_back(pts[i]);
  }
  if (s.back() > hi) {
    const Vec2 e = point_at(hi);
    if (!(out.back() == e)) out.push_back(e);
  }
  return from_points(std::move(out), base);
}

Polyline Polyline::resampled(double max_segment) const {
  std::vector<Vec2> out{pts[0]};
  int base = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Vec2 a = pts[i], b = pts[i + 1];
    const int m = std::max(1, static_cast<int>(std::ceil((b - a).norm() / max_segment)));
    for (int k = 1; k < m; ++k) out.push_back(a + (b - a) * (static_cast<double>(k) / m));
    out.push_back(b);
    if (static_cast<int>(i + 1) == base_index) base = static_cast<int>(out.size()) - 1;
  }
  return from_points(std::move(out), base);
}

double point_polyline_distance(Vec2 p, const Polyline& c) {
  if (c.pts.size() == 1) return (p - c.pts[0]).norm();
  double best = INFINITY;
  for (std::size_t i = 0; i + 1 < c.pts.size(); ++i) {
    const Vec2 a = c.pts[i], d = c.pts[i + 1] - c.pts[i];
    const double dd = d.dot(d);
    const double t = dd > 0.0 ? std::clamp((p - a).dot(d) / dd, 0.0, 1.0) : 0.0;
    best = std::min(best, (p - (a + d * t)).norm());
  }
  return best;
}

double hausdorff_distance(const Polyline& a, const Polyline& b) {
  const Vec2 shift{std::round(a.base_point().x - b.base_point().x), std::round(a.base_point().y - b.base_point().y)};
  Polyline bs = b;
  for (auto& p : bs.pts) p += shift;
  double h = 0.0;
  for (const Vec2& p : a.pts) h = std::max(h, point_polyline_distance(p, bs));
  for (const Vec2& p : bs.pts) h = std::max(h, point_polyline_distance(p, a));
  return h;
}

std::vector<Vec2> push_vertices(const Endomorphism& f, const std::vector<Vec2>& pts, double max_segment,
                                bool refine_all) {
  if (pts.empty()) return {};
  constexpr std::size_t kBlock = 4096;
  const std::size_t nseg = pts.size() - 1;
  const std::size_t nblocks = nseg == 0 ? 0 : (nseg + kBlock - 1) / kBlock;
  std::vector<std::vector<Vec2>> parts(nblocks);
  parallel_for(nblocks, [&](std::size_t b) {
    std::vector<Vec2>& out = parts[b];
    const std::size_t lo = b * kBlock, hi = std::min(nseg, lo + kBlock);
    for (std::size_t i = lo; i < hi; ++i) {
      const Vec2 a = pts[i], d = pts[i + 1] - pts[i];
      out.push_back(f.lift(a));
      const double len = d.norm();
      auto emit_range = [&](double t0, double t1, bool with_start) {
        const int m = std::max(1, static_cast<int>(std::ceil((t1 - t0) * len / max_segment)));
        for (int k = with_start ? 0 : 1; k < m; ++k) {
          const double t = t0 + (t1 - t0) * (static_cast<double>(k) / m);
          if (t > 0.0) out.push_back(f.lift(a + d * t));
        }
      };
      if (refine_all) {
        emit_range(0.0, 1.0, false);
      } else {
        for (const auto& iv : f.nonaffine_intervals(a, pts[i + 1])) {
          emit_range(iv.first, iv.second, true);
          if (iv.second < 1.0) out.push_back(f.lift(a + d * iv.second));
        }
      }
    }
  });
  std::vector<Vec2> out;
  std::size_t total = 1;
  for (const auto& p : parts) total += p.size();
  out.reserve(total);
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  out.push_back(f.lift(pts.back()));
  return out;
}

}  // namespace phlab
