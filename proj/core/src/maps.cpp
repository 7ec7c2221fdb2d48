#include "phlab/maps.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include "phlab/bump.hpp"
#include "phlab/errors.hpp"

namespace phlab {

namespace {

Vec2 canonical_orientation(Vec2 v) {
  const double n = v.norm();
  v = v / n;
  if (v.x < 0.0 || (v.x == 0.0 && v.y < 0.0)) v = -v;
  if (v.x == 0.0) v.x = 0.0;
  if (v.y == 0.0) v.y = 0.0;
  return v;
}

Vec2 eigenvector(const Mat2& m, double lambda) {
  const Vec2 v1{m.b, lambda - m.a};
  const Vec2 v2{lambda - m.d, m.c};
  return canonical_orientation(v1.norm() >= v2.norm() ? v1 : v2);
}

long floor_mod(long v, long m) {
  long r = v % m;
  return r < 0 ? r + m : r;
}

const char* frame_name(PerturbationFrame f) {
  return f == PerturbationFrame::standard ? "standard" : "eigenframe";
}

}  // namespace

LinearEigenData linear_eigen_data(const IntMatrix2& im) {
  const Mat2 m = im.real();
  LinearEigenData e;
  const double tr = m.trace();
  const double dt = m.det();
  const double disc = tr * tr - 4.0 * dt;
  if (disc <= 0.0) return e;
  const double sq = std::sqrt(disc);
  // larger-magnitude root without cancellation, the other from the determinant
  const double big = tr >= 0.0 ? 0.5 * (tr + sq) : 0.5 * (tr - sq);
  const double small = dt / big;
  if (std::fabs(big) <= std::fabs(small)) return e;
  e.dominated = true;
  e.lambda_u = big;
  e.lambda_c = small;
  e.e_u = eigenvector(m, big);
  e.e_c = eigenvector(m, small);
  return e;
}

// ---------------------------------------------------------------- MapSpec

double MapSpec::default_a_box() { return 0.1 / std::sqrt(2.0); }

MapSpec MapSpec::linear(IntMatrix2 m) {
  MapSpec s;
  s.kind = MapKind::linear;
  s.matrix = m;
  return s;
}

MapSpec MapSpec::f_A() { return linear({3, 0, 0, 2}); }
MapSpec MapSpec::f_B() { return linear({3, 1, 1, 2}); }

MapSpec MapSpec::example3(double eps, double a_box) {
  MapSpec s = f_A();
  s.kind = MapKind::perturbed_linear;
  s.perturbation = Perturbation{wrap(2.0 / 3.0, 0.5), a_box, eps, PerturbationFrame::standard};
  return s;
}

MapSpec MapSpec::example4(double eps, double a_box) {
  MapSpec s = f_B();
  s.kind = MapKind::perturbed_linear;
  s.perturbation = Perturbation{wrap(0.4, 0.8), a_box, eps, PerturbationFrame::eigenframe};
  return s;
}

MapSpec MapSpec::preset(const std::string& name) {
  if (name == "f_A") return f_A();
  if (name == "f_B") return f_B();
  if (name == "example3") return example3();
  if (name == "example4") return example4();
  throw ConfigError("unknown map preset '" + name + "' (expected f_A, f_B, example3, example4)");
}

void MapSpec::validate() const {
  const long dt = matrix.det();
  if (dt == 0) throw ConfigError("map matrix: determinant must be nonzero");
  if (std::labs(dt) < 2) {
    throw ConfigError("map matrix: |det| >= 2 required (non-invertible endomorphism), got det = " +
                      std::to_string(dt));
  }
  if (kind == MapKind::linear && perturbation) {
    throw ConfigError("map kind 'linear' must not carry a perturbation");
  }
  if (kind == MapKind::perturbed_linear) {
    if (!perturbation) throw ConfigError("map kind 'perturbed-linear' requires a perturbation");
    const Perturbation& p = *perturbation;
    if (!(p.a_box > 0.0) || !std::isfinite(p.a_box)) {
      throw ConfigError("perturbation: a_box must be positive");
    }
    if (!(p.eps > 0.0) || !std::isfinite(p.eps)) {
      throw ConfigError("perturbation: eps must be positive");
    }
    if (p.frame == PerturbationFrame::eigenframe && !linear_eigen_data(matrix).dominated) {
      throw ConfigError("perturbation: eigenframe requires real eigenvalues of distinct modulus");
    }
  }
}

nlohmann::json to_json(const MapSpec& s) {
  nlohmann::json j;
  j["kind"] = s.kind == MapKind::linear ? "linear" : "perturbed-linear";
  j["matrix"] = {s.matrix.a, s.matrix.b, s.matrix.c, s.matrix.d};
  if (s.perturbation) {
    const Perturbation& p = *s.perturbation;
    j["perturbation"] = {{"q", {p.q.x(), p.q.y()}},
                         {"a_box", p.a_box},
                         {"eps", p.eps},
                         {"frame", frame_name(p.frame)}};
  }
  return j;
}

MapSpec map_spec_from_json(const nlohmann::json& j) {
  try {
    if (j.is_string()) return MapSpec::preset(j.get<std::string>());
    if (!j.is_object()) throw ConfigError("map: expected a preset name or an object");
    MapSpec s;
    if (j.contains("preset")) {
      s = MapSpec::preset(j.at("preset").get<std::string>());
      if (s.perturbation) {
        if (j.contains("eps")) s.perturbation->eps = j.at("eps").get<double>();
        if (j.contains("a_box")) s.perturbation->a_box = j.at("a_box").get<double>();
      }
      s.validate();
      return s;
    }
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "linear") {
      s.kind = MapKind::linear;
    } else if (kind == "perturbed-linear") {
      s.kind = MapKind::perturbed_linear;
    } else {
      throw ConfigError("map kind must be 'linear' or 'perturbed-linear', got '" + kind + "'");
    }
    const auto& m = j.at("matrix");
    if (!m.is_array() || m.size() != 4) throw ConfigError("map matrix must have four integers");
    for (const auto& e : m) {
      if (!e.is_number_integer()) throw ConfigError("map matrix entries must be integers");
    }
    s.matrix = {m[0].get<long>(), m[1].get<long>(), m[2].get<long>(), m[3].get<long>()};
    if (j.contains("perturbation") && !j.at("perturbation").is_null()) {
      const auto& p = j.at("perturbation");
      Perturbation pert;
      const auto& q = p.at("q");
      if (!q.is_array() || q.size() != 2) throw ConfigError("perturbation q must be [x, y]");
      pert.q = wrap(q[0].get<double>(), q[1].get<double>());
      pert.a_box = p.at("a_box").get<double>();
      pert.eps = p.at("eps").get<double>();
      const std::string frame = p.value("frame", std::string("standard"));
      if (frame == "standard") {
        pert.frame = PerturbationFrame::standard;
      } else if (frame == "eigenframe") {
        pert.frame = PerturbationFrame::eigenframe;
      } else {
        throw ConfigError("perturbation frame must be 'standard' or 'eigenframe'");
      }
      s.perturbation = pert;
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("map spec: ") + e.what());
  }
}

// ----------------------------------------------------------- Endomorphism

Endomorphism::Endomorphism(MapSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  const IntMatrix2& im = spec_.matrix;
  m_ = im.real();
  det_ = im.det();
  adj_ = {im.d, -im.b, -im.c, im.a};
  eig_ = linear_eigen_data(im);

  const long n = std::labs(det_);
  std::set<std::pair<long, long>> seen;
  for (long i = 0; i < n && static_cast<long>(cosets_.size()) < n; ++i) {
    for (long j = 0; j < n && static_cast<long>(cosets_.size()) < n; ++j) {
      const long kx = floor_mod(adj_.a * i + adj_.b * j, n);
      const long ky = floor_mod(adj_.c * i + adj_.d * j, n);
      if (seen.insert({kx, ky}).second) {
        coset_keys_.push_back({kx, ky});
        cosets_.push_back({static_cast<double>(i), static_cast<double>(j)});
      }
    }
  }

  linear_tau_ = 1.0;
  const double dd = static_cast<double>(det_);
  for (std::size_t k = 1; k < cosets_.size(); ++k) {
    const Vec2 c = cosets_[k];
    const Vec2 z{(adj_.a * c.x + adj_.b * c.y) / dd, (adj_.c * c.x + adj_.d * c.y) / dd};
    linear_tau_ = std::min(linear_tau_, torus_distance(wrap(z.x, z.y), TorusPoint{}));
  }

  if (spec_.perturbation) {
    const Perturbation& p = *spec_.perturbation;
    q_ = p.q.coords();
    a_ = p.a_box;
    eps_ = p.eps;
    if (p.frame == PerturbationFrame::eigenframe) {
      fu_ = eig_.e_u;
      fc_ = eig_.e_c;
    }
    const Mat2 frame{fu_.x, fc_.x, fu_.y, fc_.y};
    frame_inv_ = frame.inverse();
    support_radius_ = a_ * std::max((fu_ + fc_).norm(), (fu_ - fc_).norm());
    if (!(support_radius_ < 0.5 * linear_tau_) || !(support_radius_ < 0.25)) {
      throw ConfigError("perturbation: support box circumradius " + std::to_string(support_radius_) +
                        " must be below tau/2 = " + std::to_string(0.5 * linear_tau_));
    }
    // local diffeomorphism premise, checked on a lattice over the support box
    const int k = 32;
    for (int i = 0; i <= k; ++i) {
      for (int j = 0; j <= k; ++j) {
        const Vec2 X = q_ + fu_ * (a_ * (2.0 * i / k - 1.0)) + fc_ * (a_ * (2.0 * j / k - 1.0));
        if (std::fabs((m_ * perturbation_jacobian(X)).det()) < 1e-8) {
          throw ConfigError("perturbation: eps too large, derivative degenerates in the support box");
        }
      }
    }
  }
}

int Endomorphism::default_depth() const {
  if (!eig_.dominated) return 40;
  const double gap = std::log(std::fabs(eig_.lambda_u) / std::fabs(eig_.lambda_c));
  return std::max(40, static_cast<int>(std::ceil(37.0 / gap)));
}

Endomorphism::Chart Endomorphism::chart_of(Vec2 X) const {
  Chart ch;
  const Vec2 d{X.x - q_.x - std::round(X.x - q_.x), X.y - q_.y - std::round(X.y - q_.y)};
  const Vec2 uc = frame_inv_ * d;
  ch.u = uc.x;
  ch.c = uc.y;
  ch.inside = std::fabs(uc.x) < a_ && std::fabs(uc.y) < a_;
  return ch;
}

Vec2 Endomorphism::lift(Vec2 X) const {
  if (!spec_.perturbation) return m_ * X;
  const Chart ch = chart_of(X);
  if (!ch.inside) return m_ * X;
  const double g = bump::psi1(ch.u / a_) * bump::psi2(ch.c / a_);
  return m_ * (X + fc_ * (eps_ * a_ * g));
}

Mat2 Endomorphism::perturbation_jacobian(Vec2 X) const {
  if (!spec_.perturbation) return Mat2::identity();
  const Chart ch = chart_of(X);
  if (!ch.inside) return Mat2::identity();
  const double su = ch.u / a_, sc = ch.c / a_;
  // gradient of g(u(X), c(X)) in standard coordinates
  const double gu = bump::dpsi1(su) * bump::psi2(sc);
  const double gc = bump::psi1(su) * bump::dpsi2(sc);
  const Vec2 grad{frame_inv_.a * gu + frame_inv_.c * gc, frame_inv_.b * gu + frame_inv_.d * gc};
  return {1.0 + eps_ * fc_.x * grad.x, eps_ * fc_.x * grad.y, eps_ * fc_.y * grad.x,
          1.0 + eps_ * fc_.y * grad.y};
}

Mat2 Endomorphism::derivative_at(Vec2 X) const {
  if (!spec_.perturbation) return m_;
  const Mat2 d = m_ * perturbation_jacobian(X);
  if (std::fabs(d.det()) < 1e-8) {
    throw NumericalError("derivative: |det| < 1e-8, perturbation violates the local diffeomorphism premise");
  }
  return d;
}

Vec2 Endomorphism::displace(Vec2 X, Vec2 delta) const {
  if (!spec_.perturbation) return m_ * delta;
  if (delta.norm_inf() > 0.25) return lift(X + delta) - lift(X);
  // chart anchored at the lattice copy of q nearest the midpoint
  const Vec2 mid = X + delta * 0.5;
  const Vec2 k{std::round(mid.x - q_.x), std::round(mid.y - q_.y)};
  const Vec2 uc = frame_inv_ * (X - q_ - k);
  const Vec2 duc = frame_inv_ * delta;
  const double su = uc.x / a_, sc = uc.y / a_;
  const double dsu = duc.x / a_, dsc = duc.y / a_;
  const double dg =
      bump::psi1_delta(su, dsu) * bump::psi2(sc + dsc) + bump::psi1(su) * bump::psi2_delta(sc, dsc);
  return m_ * (delta + fc_ * (eps_ * a_ * dg));
}

Vec2 Endomorphism::lifted_preimage(Vec2 target, Vec2 seed, int branch) const {
  const double dd = static_cast<double>(det_);
  auto linear_solve = [&](Vec2 t) {
    return Vec2{(adj_.a * t.x + adj_.b * t.y) / dd, (adj_.c * t.x + adj_.d * t.y) / dd};
  };
  if (!spec_.perturbation) return linear_solve(target);
  Vec2 z = seed;
  Vec2 g = lift(z) - target;
  double r = g.norm_inf();
  const double floor_tol = 4e-16 * (1.0 + target.norm_inf());
  for (int it = 0; it < 50 && r > floor_tol; ++it) {
    const Vec2 step = derivative_at(z).inverse() * g;
    double scale = 1.0;
    Vec2 zn = z - step;
    Vec2 gn = lift(zn) - target;
    double rn = gn.norm_inf();
    int halvings = 0;
    while (rn > r && halvings < 30) {
      scale *= 0.5;
      zn = z - step * scale;
      gn = lift(zn) - target;
      rn = gn.norm_inf();
      ++halvings;
    }
    if (!(rn < r)) break;  // stalled at rounding level
    z = zn;
    g = gn;
    r = rn;
  }
  if (!(r <= 1e-12)) throw NewtonFailure(branch, r);
  return z;
}

TorusPoint Endomorphism::inverse_branch(TorusPoint p, int branch) const {
  if (branch < 0 || branch >= degree()) {
    throw ConfigError("inverse branch index " + std::to_string(branch) + " out of range");
  }
  const Vec2 target = p.coords() + cosets_[static_cast<std::size_t>(branch)];
  const double dd = static_cast<double>(det_);
  const Vec2 seed{(adj_.a * target.x + adj_.b * target.y) / dd,
                  (adj_.c * target.x + adj_.d * target.y) / dd};
  if (!spec_.perturbation) return TorusPoint::wrap(seed);
  return TorusPoint::wrap(lifted_preimage(target, seed, branch));
}

int Endomorphism::branch_index(TorusPoint z, TorusPoint p) const {
  const Vec2 k = lift(z.coords()) - p.coords();
  const long kx = std::lround(k.x), ky = std::lround(k.y);
  const long n = std::labs(det_);
  const std::pair<long, long> key{floor_mod(adj_.a * kx + adj_.b * ky, n),
                                  floor_mod(adj_.c * kx + adj_.d * ky, n)};
  for (std::size_t j = 0; j < coset_keys_.size(); ++j) {
    if (coset_keys_[j] == key) return static_cast<int>(j);
  }
  throw NumericalError("branch_index: no matching coset");
}

std::vector<TorusPoint> Endomorphism::inverse_branches(TorusPoint p) const {
  std::vector<TorusPoint> out;
  out.reserve(cosets_.size());
  for (int k = 0; k < degree(); ++k) out.push_back(inverse_branch(p, k));
  return out;
}

TorusPoint Endomorphism::evaluate(TorusPoint p) const { return TorusPoint::wrap(lift(p.coords())); }

TorusPoint Endomorphism::iterate(TorusPoint p, int n) const {
  for (int i = 0; i < n; ++i) p = evaluate(p);
  return p;
}

std::vector<std::pair<double, double>> Endomorphism::nonaffine_intervals(Vec2 a, Vec2 b) const {
  std::vector<std::pair<double, double>> out;
  if (!spec_.perturbation) return out;
  const double r = support_radius_ * (1.0 + 1e-9) + 1e-12;
  const Vec2 d = b - a;
  const double len = d.norm();
  const double A = d.dot(d);
  if (len == 0.0) {
    const Vec2 w{a.x - q_.x - std::round(a.x - q_.x), a.y - q_.y - std::round(a.y - q_.y)};
    if (w.norm() <= r) out.push_back({0.0, 1.0});
    return out;
  }
  const long chunks = std::max(1L, static_cast<long>(std::ceil(len / 0.5)));
  const double h = 0.5 * len / static_cast<double>(chunks);
  for (long ch = 0; ch < chunks; ++ch) {
    const double tm = (static_cast<double>(ch) + 0.5) / static_cast<double>(chunks);
    const Vec2 mid = a + d * tm;
    const long kx0 = static_cast<long>(std::floor(mid.x - q_.x - r - h));
    const long kx1 = static_cast<long>(std::ceil(mid.x - q_.x + r + h));
    const long ky0 = static_cast<long>(std::floor(mid.y - q_.y - r - h));
    const long ky1 = static_cast<long>(std::ceil(mid.y - q_.y + r + h));
    for (long kx = kx0; kx <= kx1; ++kx) {
      for (long ky = ky0; ky <= ky1; ++ky) {
        const Vec2 w = a - (q_ + Vec2{static_cast<double>(kx), static_cast<double>(ky)});
        const double B = 2.0 * w.dot(d);
        const double C = w.dot(w) - r * r;
        const double disc = B * B - 4.0 * A * C;
        if (disc < 0.0) continue;
        const double sq = std::sqrt(disc);
        const double lo = std::max(0.0, (-B - sq) / (2.0 * A));
        const double hi = std::min(1.0, (-B + sq) / (2.0 * A));
        if (lo < hi) out.push_back({lo, hi});
      }
    }
  }
  std::sort(out.begin(), out.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& iv : out) {
    if (!merged.empty() && iv.first <= merged.back().second) {
      merged.back().second = std::max(merged.back().second, iv.second);
    } else {
      merged.push_back(iv);
    }
  }
  return merged;
}

double Endomorphism::empirical_separation(int grid_n) const {
  double tau = 1.0;
  for (int i = 0; i < grid_n; ++i) {
    for (int j = 0; j < grid_n; ++j) {
      const TorusPoint p = wrap((i + 0.5) / grid_n, (j + 0.5) / grid_n);
      const auto br = inverse_branches(p);
      for (std::size_t s = 0; s < br.size(); ++s) {
        for (std::size_t t = s + 1; t < br.size(); ++t) {
          tau = std::min(tau, torus_distance(br[s], br[t]));
        }
      }
    }
  }
  return tau;
}

double Endomorphism::max_log_derivative_norm(int grid_n) const {
  double best = std::log(m_.operator_norm());
  if (!spec_.perturbation) return best;
  for (int i = 0; i < grid_n; ++i) {
    for (int j = 0; j < grid_n; ++j) {
      const Vec2 X{(i + 0.5) / grid_n, (j + 0.5) / grid_n};
      best = std::max(best, std::log(derivative_at(X).operator_norm()));
    }
  }
  // dense sampling of the support box, where the derivative actually varies
  const int k = 64;
  for (int i = 0; i <= k; ++i) {
    for (int j = 0; j <= k; ++j) {
      const Vec2 uc{a_ * (2.0 * i / k - 1.0), a_ * (2.0 * j / k - 1.0)};
      const Vec2 X = q_ + fu_ * uc.x + fc_ * uc.y;
      best = std::max(best, std::log(derivative_at(X).operator_norm()));
    }
  }
  return best;
}

// ------------------------------------------------------------------ cones

double ConeField::clearance(Direction d) const { return half_width - angle_between(d, center); }

ConeField ConeField::from_slopes(double lo, double hi) {
  if (!(lo < hi)) throw ConfigError("cone: slope range must be increasing");
  const double t0 = std::atan(lo), t1 = std::atan(hi);
  return {Direction::from_angle(0.5 * (t0 + t1)), 0.5 * (t1 - t0)};
}

ConeCertificate certify_cones(const Endomorphism& f, const ConeField& cone, int ell, int grid_n,
                              int interior_samples) {
  if (grid_n < 16) throw ConfigError("certify_cones: grid_n >= 16 required");
  if (ell < 1) throw ConfigError("certify_cones: ell >= 1 required");
  if (!(cone.half_width > 0.0 && cone.half_width < 0.5 * 3.141592653589793)) {
    throw ConfigError("certify_cones: half_width must lie in (0, pi/2)");
  }
  ConeCertificate cert;
  cert.ell = ell;
  cert.grid_n = grid_n;
  cert.directions_per_point = interior_samples + 2;
  cert.sigma = INFINITY;
  cert.margin = INFINITY;
  const int ndir = interior_samples + 2;
  std::vector<Vec2> dirs;
  for (int k = 0; k < ndir; ++k) {
    const double off = cone.half_width * (2.0 * k / (ndir - 1) - 1.0);
    dirs.push_back(Direction::from_angle(cone.center.theta() + off).unit());
  }
  // Worst cell: the one with the smallest clearance, or with sub-unit expansion.
  double worst_score = INFINITY;
  for (int i = 0; i < grid_n; ++i) {
    for (int j = 0; j < grid_n; ++j) {
      TorusPoint p = wrap((i + 0.5) / grid_n, (j + 0.5) / grid_n);
      Mat2 D = Mat2::identity();
      for (int s = 0; s < ell; ++s) {
        D = f.derivative(p) * D;
        p = f.evaluate(p);
      }
      double cell_margin = INFINITY, cell_sigma = INFINITY;
      for (const Vec2& v : dirs) {
        const Vec2 w = D * v;
        cell_sigma = std::min(cell_sigma, w.norm());
        cell_margin = std::min(cell_margin, cone.clearance(Direction::from_vector(w)));
      }
      cert.sigma = std::min(cert.sigma, cell_sigma);
      cert.margin = std::min(cert.margin, cell_margin);
      const double score = std::min(cell_margin, cell_sigma - 1.0);
      if (score < worst_score) {
        worst_score = score;
        cert.worst_i = i;
        cert.worst_j = j;
      }
    }
  }
  cert.verified = cert.margin > 0.0 && cert.sigma > 1.0;
  cert.injectivity_tau = f.is_linear() ? f.linear_separation() : f.empirical_separation(grid_n);
  return cert;
}

nlohmann::json to_json(const ConeCertificate& c) {
  return {{"ell", c.ell},
          {"sigma", c.sigma},
          {"grid_n", c.grid_n},
          {"margin", c.margin},
          {"verified", c.verified},
          {"worst_cell", {c.worst_i, c.worst_j}},
          {"directions_per_point", c.directions_per_point},
          {"injectivity_tau", c.injectivity_tau}};
}

}  // namespace phlab
