#include "phlab/normal_forms.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

#include "phlab/errors.hpp"

namespace phlab {

namespace {

constexpr double kLastFactorTol = 1e-6;

// Words need this much past beyond the truncation depth for E^u to settle at the deepest level.
constexpr int kDirectionMargin = 30;

PastWord with_margin(const Endomorphism& f, const PastWord& w, int depth) {
  const int need = depth + kDirectionMargin;
  if (w.depth() >= need) return w;
  return deepen(f, w, need - w.depth(), BranchChooser::uniform(0));
}

Vec2 unit(Vec2 v) { return v / v.norm(); }

}  // namespace

CurveHistory::CurveHistory(const Endomorphism& f, const Polyline& curve, const PastWord& w, Bundle bundle, int depth)
    : bundle_(bundle), depth_(depth), curve_(curve), word_(with_margin(f, w, depth)) {
  if (depth < 1) throw ConfigError("CurveHistory: depth must be >= 1");
  if (!approx_equal(TorusPoint::wrap(curve.base_point()), w.base(), 1e-9)) {
    throw ConfigError("CurveHistory: curve base does not project to the word's base point");
  }
  const std::size_t n = curve.size();
  const auto b = static_cast<std::size_t>(curve.base_index);
  const auto levels = static_cast<std::size_t>(depth) + 1;
  levels_.assign(levels, std::vector<Vec2>(n));
  dirs_.assign(levels, std::vector<Vec2>(n));
  logs_.assign(levels, std::vector<double>(n, 0.0));
  levels_[0] = curve.pts;

  for (std::size_t i = 0; i + 1 < levels; ++i) {
    const std::vector<Vec2>& up = levels_[i];
    std::vector<Vec2>& cur = levels_[i + 1];
    const Vec2 zb = word_.at(static_cast<int>(i) + 1).coords();
    const Vec2 fz = f.lift(zb);
    const Vec2 k{std::round(up[b].x - fz.x), std::round(up[b].y - fz.y)};
    cur[b] = zb;
    auto solve = [&](std::size_t v, std::size_t from) {
      const Vec2 target = up[v] - k;
      const Vec2 seed = cur[from] + f.derivative_at(cur[from]).inverse() * (target - (up[from] - k));
      cur[v] = f.lifted_preimage(target, seed);
    };
    for (std::size_t v = b + 1; v < n; ++v) solve(v, v - 1);
    for (std::size_t v = b; v-- > 0;) solve(v, v + 1);
  }

  if (bundle == Bundle::unstable) {
    const Trajectory tr(f, word_, 0, 0);
    const Vec2 seed = tr.unstable(-depth);
    dirs_[levels - 1].assign(n, seed);
    for (std::size_t i = levels - 1; i >= 1; --i) {
      for (std::size_t v = 0; v < n; ++v) {
        const Vec2 g = f.derivative_at(levels_[i][v]) * dirs_[i][v];
        logs_[i][v] = std::log(g.norm());
        dirs_[i - 1][v] = unit(g);
      }
    }
  } else {
    for (std::size_t v = 0; v < n; ++v) dirs_[0][v] = oriented_unit(center_field(f, levels_[0][v]), f.eigen().e_c);
    for (std::size_t i = 0; i + 1 < levels; ++i) {
      for (std::size_t v = 0; v < n; ++v) {
        const Vec2 g = f.derivative_at(levels_[i + 1][v]).inverse() * dirs_[i][v];
        logs_[i + 1][v] = -std::log(g.norm());
        dirs_[i + 1][v] = unit(g);
      }
    }
  }
}

double CurveHistory::log_rho(std::size_t a, std::size_t b) const {
  double s = 0.0;
  for (std::size_t i = 1; i < logs_.size(); ++i) s += logs_[i][a] - logs_[i][b];
  return s;
}

double CurveHistory::last_factor_deviation(std::size_t a, std::size_t b) const {
  return std::fabs(std::expm1(logs_.back()[a] - logs_.back()[b]));
}

double density_rho(const CurveHistory& h, std::size_t base, std::size_t target) {
  const double dev = h.last_factor_deviation(base, target);
  if (dev > kLastFactorTol) {
    throw NumericalError("density_rho: last factor deviates from 1 by " + std::to_string(dev));
  }
  return std::exp(h.log_rho(base, target));
}

DensityProfile density_profile(const CurveHistory& h, std::size_t base) {
  if (base >= h.size()) throw ConfigError("density_profile: base vertex out of range");
  DensityProfile d;
  d.base_index = static_cast<int>(base);
  d.truncation_depth = h.depth();
  d.rho.resize(h.size());
  for (std::size_t v = 0; v < h.size(); ++v) {
    d.rho[v] = v == base ? 1.0 : std::exp(h.log_rho(base, v));
    d.max_last_factor_deviation = std::max(d.max_last_factor_deviation, h.last_factor_deviation(base, v));
  }
  return d;
}

NormalChart normal_chart(const CurveHistory& h, std::size_t base) {
  const DensityProfile d = density_profile(h, base);
  if (d.max_last_factor_deviation > kLastFactorTol) {
    throw NumericalError("normal_chart: density not converged, last factor deviation " +
                         std::to_string(d.max_last_factor_deviation));
  }
  NormalChart c;
  c.curve = h.curve();
  c.curve.base_index = static_cast<int>(base);
  c.curve.recompute_arclength();
  c.base_index = static_cast<int>(base);
  c.truncation_depth = h.depth();
  c.rho = d.rho;
  c.R.assign(h.size(), 0.0);
  const auto& p = c.curve.pts;
  for (std::size_t v = base + 1; v < p.size(); ++v) {
    c.R[v] = c.R[v - 1] + 0.5 * (c.rho[v - 1] + c.rho[v]) * (p[v] - p[v - 1]).norm();
  }
  for (std::size_t v = base; v-- > 0;) c.R[v] = c.R[v + 1] - 0.5 * (c.rho[v] + c.rho[v + 1]) * (p[v + 1] - p[v]).norm();
  return c;
}

double NormalChart::R_at_arclength(double s) const {
  if (s < curve.s_min() - 1e-15 || s > curve.s_max() + 1e-15) throw ConfigError("NormalChart: outside the chart");
  if (curve.size() == 1) return 0.0;
  const std::size_t i = curve.segment_at(s);
  const double ds = curve.s[i + 1] - curve.s[i];
  const double u = s - curve.s[i];
  if (!(ds > 0.0)) return R[i];
  return R[i] + rho[i] * u + (rho[i + 1] - rho[i]) * u * u / (2.0 * ds);
}

double NormalChart::arclength_at(double r) const {
  if (r < R.front() - 1e-15 || r > R.back() + 1e-15) throw ConfigError("NormalChart: outside the chart");
  if (curve.size() == 1) return 0.0;
  auto it = std::upper_bound(R.begin(), R.end(), r);
  std::size_t i = it == R.begin() ? 0 : static_cast<std::size_t>(it - R.begin()) - 1;
  i = std::min(i, R.size() - 2);
  const double ds = curve.s[i + 1] - curve.s[i];
  const double a = (rho[i + 1] - rho[i]) / (2.0 * ds);
  const double c = r - R[i];
  // a u^2 + rho_i u - c = 0, root in [0, ds]
  const double u = 2.0 * c / (rho[i] + std::sqrt(std::max(0.0, rho[i] * rho[i] + 4.0 * a * c)));
  return curve.s[i] + std::clamp(u, 0.0, ds);
}

Vec2 NormalChart::phi(double r) const { return curve.point_at(arclength_at(r)); }

double NormalChart::R_of_point(Vec2 p) const {
  if (curve.size() == 1) return 0.0;
  double best = 0.0, best_s = 0.0;
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    const Vec2 a = curve.pts[i], d = curve.pts[i + 1] - a;
    const double dd = d.dot(d);
    const double t = dd > 0.0 ? std::clamp((p - a).dot(d) / dd, 0.0, 1.0) : 0.0;
    const double dist = (a + d * t - p).norm();
    if (i == 0 || dist < best) {
      best = dist;
      best_s = curve.s[i] + (curve.s[i + 1] - curve.s[i]) * t;
    }
  }
  return R_at_arclength(best_s);
}

AffineCheckReport affine_transition(const NormalChart& a, const NormalChart& b) {
  if (a.curve.size() != b.curve.size()) throw ConfigError("affine_transition: charts live on different curves");
  const std::size_t n = a.R.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    mx += a.R[v];
    my += b.R[v];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    sxx += (a.R[v] - mx) * (a.R[v] - mx);
    sxy += (a.R[v] - mx) * (b.R[v] - my);
  }
  AffineCheckReport r;
  r.slope = sxx > 0.0 ? sxy / sxx : 1.0;
  r.offset = my - r.slope * mx;
  for (std::size_t v = 0; v < n; ++v) r.residual = std::max(r.residual, std::fabs(b.R[v] - (r.slope * a.R[v] + r.offset)));
  const auto ab = static_cast<std::size_t>(a.base_index);
  r.expected_slope = b.rho[ab];
  r.expected_offset = b.R[ab];
  return r;
}

ConjugacyCheck conjugacy_check(const Endomorphism& f, const Polyline& curve, const PastWord& w, Bundle bundle,
                               int depth) {
  const CurveHistory h0(f, curve, w, bundle, depth);
  const NormalChart c0 = normal_chart(h0);

  const PastWord fw = shift(f, w);
  const Vec2 xb = curve.base_point();
  const Vec2 zb = nearest_lift(fw.base(), f.lift(xb));
  std::vector<Vec2> img(curve.size());
  for (std::size_t v = 0; v < curve.size(); ++v) {
    img[v] = static_cast<int>(v) == curve.base_index ? zb : zb + f.displace(xb, curve.pts[v] - xb);
  }
  const CurveHistory h1(f, Polyline::from_points(std::move(img), curve.base_index), fw, bundle, depth);
  const NormalChart c1 = normal_chart(h1);

  ConjugacyCheck out;
  out.lambda = std::exp(h1.log_stretch(1, static_cast<std::size_t>(curve.base_index)));
  out.vertices = curve.size();
  for (std::size_t v = 0; v < curve.size(); ++v) {
    out.max_residual = std::max(out.max_residual, std::fabs(c1.R[v] - out.lambda * c0.R[v]));
  }
  return out;
}

CuChart::CuChart(const Endomorphism& f, const PastWord& w, CuChartParams params)
    : f_(&f), w_(with_margin(f, w, params.truncation_depth)), p_(params) {
  const CenterCurve cc = center_curve(f, w.base(), p_.center_radius, p_.resolution);
  center_ = normal_chart(CurveHistory(f, cc.curve, w_, Bundle::center, p_.truncation_depth));
  const Trajectory tr(f, w_, 0, 0);
  for (int i = 1; i <= p_.truncation_depth; ++i) base_logs_.push_back(tr.log_stretch(Bundle::unstable, -i));
}

PastWord CuChart::word_at(double s, Vec2& y_lift) const {
  y_lift = center_.phi(s);
  return match_past(*f_, w_, TorusPoint::wrap(y_lift));
}

double CuChart::beta(double s) const {
  Vec2 y;
  const PastWord yw = word_at(s, y);
  const Trajectory ty(*f_, yw, 0, 0);
  double acc = 0.0;
  for (int i = 1; i <= p_.truncation_depth; ++i) {
    acc += ty.log_stretch(Bundle::unstable, -i) - base_logs_[static_cast<std::size_t>(i - 1)];
  }
  return std::exp(acc);
}

Vec2 CuChart::lifted(double t, double s) const {
  Vec2 y;
  const PastWord yw = word_at(s, y);
  const double b = beta(s);
  const UnstableArc arc = unstable_arc(*f_, yw, p_.unstable_radius, p_.resolution);
  const NormalChart cu = normal_chart(CurveHistory(*f_, arc.curve, yw, Bundle::unstable, p_.truncation_depth));
  return cu.phi(b * t) + (y - arc.curve.base_point());
}

void write_chart_csv(std::ostream& os, const NormalChart& c) {
  os << "s,rho,R\n" << std::setprecision(17);
  for (std::size_t i = 0; i < c.R.size(); ++i) os << c.curve.s[i] << ',' << c.rho[i] << ',' << c.R[i] << '\n';
}

nlohmann::json to_json(const DensityProfile& d) {
  return {{"base_index", d.base_index},
          {"truncation_depth", d.truncation_depth},
          {"max_last_factor_deviation", d.max_last_factor_deviation},
          {"rho", d.rho}};
}

nlohmann::json to_json(const AffineCheckReport& r) {
  return {{"slope", r.slope},
          {"offset", r.offset},
          {"residual", r.residual},
          {"expected_slope", r.expected_slope},
          {"expected_offset", r.expected_offset}};
}

nlohmann::json to_json(const ConjugacyCheck& c) {
  return {{"lambda", c.lambda}, {"max_residual", c.max_residual}, {"vertices", c.vertices}};
}

}  // namespace phlab
