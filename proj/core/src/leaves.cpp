#include "phlab/leaves.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

#include "phlab/errors.hpp"
#include "phlab/parallel.hpp"
#include "phlab/rng.hpp"
#include "phlab/splitting.hpp"

namespace phlab {

namespace {

// Inserts interpolated vertices so that no segment, scaled by `gain`, exceeds `target`.
std::vector<Vec2> subdivide(const std::vector<Vec2>& pts, int& base, double gain, double target) {
  std::vector<Vec2> out{pts[0]};
  int nb = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Vec2 a = pts[i], d = pts[i + 1] - pts[i];
    const int m = std::max(1, static_cast<int>(std::ceil(d.norm() * gain / target)));
    for (int k = 1; k < m; ++k) out.push_back(a + d * (static_cast<double>(k) / m));
    out.push_back(pts[i + 1]);
    if (static_cast<int>(i + 1) == base) nb = static_cast<int>(out.size()) - 1;
  }
  base = nb;
  return out;
}

// Image of the chain, translated so the base vertex lands on the canonical coordinates of
// `image_base`; this keeps the lifts bounded over many levels.
std::vector<Vec2> push_from_base(const Endomorphism& f, const std::vector<Vec2>& pts, int base,
                                 TorusPoint image_base) {
  const Vec2 yb = pts[static_cast<std::size_t>(base)];
  const Vec2 zb = image_base.coords();
  std::vector<Vec2> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out[i] = static_cast<int>(i) == base ? zb : zb + f.displace(yb, pts[i] - yb);
  }
  return out;
}

int center_field_depth(const Endomorphism& f) { return std::max(30, 2 * f.default_depth() / 3); }

Vec2 rk4_step(const Endomorphism& f, Vec2 x, double h, Vec2 hint) {
  auto field = [&](Vec2 p, Vec2 d) { return oriented_unit(center_field(f, p), d); };
  const Vec2 k1 = field(x, hint);
  const Vec2 k2 = field(x + k1 * (0.5 * h), k1);
  const Vec2 k3 = field(x + k2 * (0.5 * h), k2);
  const Vec2 k4 = field(x + k3 * h, k3);
  return x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
}

std::vector<Vec2> integrate_center(const Endomorphism& f, Vec2 start, Vec2 dir, double radius, double step) {
  constexpr double kTol = 1e-12;
  std::vector<Vec2> out;
  Vec2 x = start, hint = dir;
  double t = 0.0;
  while (radius - t > 1e-9 * step) {
    double h = std::min(step, radius - t);
    int halvings = 0;
    for (;;) {
      const Vec2 full = rk4_step(f, x, h, hint);
      const Vec2 mid = rk4_step(f, x, 0.5 * h, hint);
      const Vec2 half = rk4_step(f, mid, 0.5 * h, oriented_unit(center_field(f, mid), hint));
      if ((full - half).norm() <= kTol) {
        hint = half - x;
        x = half;
        t += h;
        break;
      }
      if (++halvings > 10) throw NumericalError("center_curve: step rejected after 10 halvings");
      h *= 0.5;
    }
    out.push_back(x);
  }
  return out;
}

bool segment_crossing(Vec2 p, Vec2 p2, Vec2 q, Vec2 q2, double& t, double& u) {
  const Vec2 r = p2 - p, sv = q2 - q;
  const double den = r.cross(sv);
  if (den == 0.0) return false;
  t = (q - p).cross(sv) / den;
  u = (q - p).cross(r) / den;
  constexpr double e = 1e-12;
  return t >= -e && t <= 1.0 + e && u >= -e && u <= 1.0 + e;
}

}  // namespace

UnstableArc unstable_arc(const Endomorphism& f, const PastWord& w, double radius, double resolution) {
  if (!(radius > 0.0) || !(resolution > 0.0)) throw ConfigError("unstable_arc: radius and resolution must be > 0");
  const double ratio = std::fabs(f.eigen().lambda_c / f.eigen().lambda_u);
  const int depth = w.depth();
  if (!(std::pow(ratio, depth) < 1e-8)) {
    throw ConfigError("unstable_arc: past depth " + std::to_string(depth) + " too short for the graph transform");
  }
  const Trajectory tr(f, w, 0, 0);
  auto growth = [&](int k) { return std::exp(tr.log_cocycle(Bundle::unstable, -k, k)); };
  int k = 0;
  for (int j = std::min(depth, 24); j >= 1; --j) {
    if (2.0 * radius / growth(j) >= 1e-7) {
      k = j;
      break;
    }
  }

  double h = 1.25 * radius / growth(k);
  for (int attempt = 0; attempt < 6; ++attempt, h *= 2.0) {
    const Vec2 x = w.at(k).coords();
    const Vec2 e = tr.unstable(-k);
    std::vector<Vec2> pts;
    constexpr int kSeed = 17;
    for (int i = 0; i < kSeed; ++i) {
      const double t = h * (2.0 * i / (kSeed - 1) - 1.0);
      pts.push_back(i == kSeed / 2 ? x : x + e * t);
    }
    int base = kSeed / 2;
    pts = subdivide(pts, base, 1.1 * growth(k), resolution);

    std::vector<Vec2> prev;
    int prev_base = base;
    for (int j = k; j >= 1; --j) {
      prev = pts;
      prev_base = base;
      pts = push_from_base(f, pts, base, w.at(j - 1));
    }
    // the predicted growth can undershoot where the stretch varies; refine the last level
    for (int pass = 0; k >= 1 && pass < 20; ++pass) {
      bool long_seg = false;
      std::vector<Vec2> refined{prev[0]};
      int nb = 0;
      for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if ((pts[i + 1] - pts[i]).norm() > resolution) {
          long_seg = true;
          refined.push_back((prev[i] + prev[i + 1]) * 0.5);
        }
        refined.push_back(prev[i + 1]);
        if (static_cast<int>(i + 1) == prev_base) nb = static_cast<int>(refined.size()) - 1;
      }
      if (!long_seg) break;
      prev = std::move(refined);
      prev_base = prev_base == 0 ? 0 : nb;
      base = prev_base;
      pts = push_from_base(f, prev, prev_base, w.at(0));
    }
    if (k == 0) pts = subdivide(pts, base, 1.0, resolution);

    Polyline full = Polyline::from_points(std::move(pts), base);
    if (full.s_min() <= -radius && full.s_max() >= radius) {
      return {w, full.trimmed(-radius, radius)};
    }
  }
  throw NumericalError("unstable_arc: trimming leaves an arc shorter than the radius");
}

Direction center_field(const Endomorphism& f, Vec2 X) {
  return center_direction(f, TorusPoint::wrap(X), center_field_depth(f), f.seed_center());
}

CenterCurve center_curve(const Endomorphism& f, TorusPoint p, double radius, double resolution) {
  if (!(radius > 0.0) || !(resolution > 0.0)) throw ConfigError("center_curve: radius and resolution must be > 0");
  const Vec2 x = p.coords();
  const Vec2 d = oriented_unit(center_field(f, x), f.eigen().e_c);
  std::vector<Vec2> back = integrate_center(f, x, -d, radius, resolution);
  std::vector<Vec2> fwd = integrate_center(f, x, d, radius, resolution);
  std::vector<Vec2> pts(back.rbegin(), back.rend());
  const int base = static_cast<int>(pts.size());
  pts.push_back(x);
  pts.insert(pts.end(), fwd.begin(), fwd.end());
  return {Polyline::from_points(std::move(pts), base)};
}

SpecialnessReport specialness_probe(const Endomorphism& f, TorusPoint p, int depth, int samples,
                                    std::uint64_t seed, const std::vector<PastWord>& extra_words) {
  if (samples < 2) throw ConfigError("specialness_probe: samples must be >= 2");
  SpecialnessReport r;
  r.base = p;
  r.depth = depth;
  r.sample_count = samples;
  const CounterRng root(seed);
  std::vector<Direction> dirs(static_cast<std::size_t>(samples));
  parallel_for(dirs.size(), [&](std::size_t i) {
    const PastWord w = extend_past(f, p, BranchChooser::uniform(root.substream(i).key()), depth);
    dirs[i] = unstable_direction(f, w);
  });
  for (const PastWord& w : extra_words) {
    if (!approx_equal(w.base(), p, 1e-12)) throw ConfigError("specialness_probe: extra word has another base");
    dirs.push_back(unstable_direction(f, w.truncated(std::min(depth, w.depth()))));
  }
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    r.per_word_angles.push_back(dirs[i].theta());
    for (std::size_t j = 0; j < i; ++j) r.angle_spread = std::max(r.angle_spread, angle_between(dirs[i], dirs[j]));
  }
  return r;
}

HolonomyResult cs_holonomy(const Endomorphism& f, const UnstableArc& arc_x, const UnstableArc& arc_y, double s_u,
                           double search_radius, double resolution) {
  if (!approx_equal(arc_x.past.base(), arc_y.past.base(), 1e-12)) {
    throw ConfigError("cs_holonomy: arcs must share the base point");
  }
  const Vec2 pu = arc_x.curve.point_at(s_u);
  const Vec2 dy = arc_x.curve.base_point() - arc_y.curve.base_point();
  Polyline ay = arc_y.curve;
  const Vec2 shift{std::round(dy.x), std::round(dy.y)};
  for (Vec2& v : ay.pts) v += shift;

  HolonomyResult res;
  auto crossing_on_y = [&](Vec2 p0, Vec2 p1, double s0, double s1, double& best_sigma, bool& found) {
    for (std::size_t j = 0; j + 1 < ay.size(); ++j) {
      double t = 0.0, u = 0.0;
      if (!segment_crossing(p0, p1, ay.pts[j], ay.pts[j + 1], t, u)) continue;
      const double sigma = s0 + (s1 - s0) * t;
      if (!found || std::fabs(sigma) < std::fabs(best_sigma)) {
        found = true;
        best_sigma = sigma;
        res.lifted = p0 + (p1 - p0) * t;
        res.s_on_y = ay.s[j] + (ay.s[j + 1] - ay.s[j]) * u;
      }
    }
  };

  if (point_polyline_distance(pu, ay) <= 1e-13) {
    res.lifted = pu;
    res.point = TorusPoint::wrap(pu);
    res.displacement = 0.0;
    double best = 0.0;
    for (std::size_t i = 0; i + 1 < ay.size(); ++i) {
      const Vec2 a = ay.pts[i], d = ay.pts[i + 1] - a;
      const double dd = d.dot(d);
      const double t = dd > 0.0 ? std::clamp((pu - a).dot(d) / dd, 0.0, 1.0) : 0.0;
      if (i == 0 || (a + d * t - pu).norm() < best) {
        best = (a + d * t - pu).norm();
        res.s_on_y = ay.s[i] + (ay.s[i + 1] - ay.s[i]) * t;
      }
    }
    return res;
  }

  CenterCurve cc = center_curve(f, TorusPoint::wrap(pu), search_radius, resolution);
  const Vec2 off = pu - cc.curve.base_point();
  for (Vec2& v : cc.curve.pts) v += off;
  bool found = false;
  double sigma = 0.0;
  for (std::size_t i = 0; i + 1 < cc.curve.size(); ++i) {
    crossing_on_y(cc.curve.pts[i], cc.curve.pts[i + 1], cc.curve.s[i], cc.curve.s[i + 1], sigma, found);
  }
  if (!found) throw NumericalError("cs_holonomy: no crossing within the search radius");
  res.displacement = sigma;
  res.point = TorusPoint::wrap(res.lifted);
  return res;
}

void mark_cells(const std::vector<Vec2>& pts, int grid_n, std::vector<std::uint8_t>& mask) {
  const auto n2 = static_cast<std::size_t>(grid_n) * static_cast<std::size_t>(grid_n);
  if (mask.size() != n2) mask.assign(n2, 0);
  if (pts.size() == 1) {
    const TorusPoint p = TorusPoint::wrap(pts[0]);
    const auto i = std::min(grid_n - 1, static_cast<int>(p.x() * grid_n));
    const auto j = std::min(grid_n - 1, static_cast<int>(p.y() * grid_n));
    mask[static_cast<std::size_t>(j) * grid_n + i] = 1;
    return;
  }
  constexpr std::size_t kBlock = 4096;
  const std::size_t nseg = pts.size() - 1;
  const std::size_t nblocks = (nseg + kBlock - 1) / kBlock;
  std::vector<std::vector<std::uint8_t>> local(nblocks);
  parallel_for(nblocks, [&](std::size_t b) {
    std::vector<std::uint8_t>& m = local[b];
    m.assign(n2, 0);
    const std::size_t hi = std::min(nseg, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < hi; ++i) {
      for_each_piece(pts[i], pts[i + 1], [&](Vec2 a, Vec2 b2) {
        rasterize_segment(a, b2, grid_n,
                          [&](int ci, int cj, double) { m[static_cast<std::size_t>(cj) * grid_n + ci] = 1; });
      });
    }
  });
  for (const auto& m : local) {
    for (std::size_t c = 0; c < n2; ++c) mask[c] |= m[c];
  }
}

CoverageReport minimality_probe(const Endomorphism& f, const Polyline& arc, int iterations, int grid_n,
                                std::size_t point_budget, double max_segment) {
  if (iterations < 0) throw ConfigError("minimality_probe: iterations must be >= 0");
  if (grid_n < 1) throw ConfigError("minimality_probe: grid_n must be >= 1");
  CoverageReport r;
  r.grid_n = grid_n;
  std::vector<Vec2> pts = arc.pts;
  auto record = [&]() {
    mark_cells(pts, grid_n, r.final_mask);
    const auto visited = std::count(r.final_mask.begin(), r.final_mask.end(), std::uint8_t{1});
    r.visited_fraction.push_back(static_cast<double>(visited) / static_cast<double>(r.final_mask.size()));
    r.vertex_count = pts.size();
  };
  record();
  for (int k = 0; k < iterations; ++k) {
    pts = push_vertices(f, pts, max_segment, false);
    if (pts.size() > point_budget) {
      throw CoverageBudgetExceeded("minimality_probe: point budget exceeded at iteration " + std::to_string(k + 1),
                                   r);
    }
    record();
  }
  return r;
}

Polyline linear_unstable_segment(const Endomorphism& f, TorusPoint p, double length) {
  if (!(length > 0.0)) throw ConfigError("linear_unstable_segment: length must be > 0");
  const Vec2 x = p.coords(), e = f.eigen().e_u * (0.5 * length);
  return Polyline::from_points({x - e, x, x + e}, 1);
}

void write_polyline_csv(std::ostream& os, const Polyline& c) {
  os << "s,x,y\n" << std::setprecision(17);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const TorusPoint p = c.torus_point(i);
    os << c.s[i] << ',' << p.x() << ',' << p.y() << '\n';
  }
}

void write_mask_pbm(std::ostream& os, const CoverageReport& r) {
  const int n = r.grid_n;
  os << "P1\n" << n << ' ' << n << '\n';
  for (int j = n - 1; j >= 0; --j) {
    for (int i = 0; i < n; ++i) {
      os << (r.final_mask[static_cast<std::size_t>(j) * n + i] ? '1' : '0') << (i + 1 < n ? " " : "");
    }
    os << '\n';
  }
}

nlohmann::json to_json(const SpecialnessReport& r) {
  return {{"base", {r.base.x(), r.base.y()}},
          {"depth", r.depth},
          {"sample_count", r.sample_count},
          {"angle_spread", r.angle_spread},
          {"per_word_angles", r.per_word_angles}};
}

nlohmann::json to_json(const CoverageReport& r) {
  return {{"grid_n", r.grid_n}, {"visited_fraction", r.visited_fraction}, {"vertex_count", r.vertex_count}};
}

}  // namespace phlab
