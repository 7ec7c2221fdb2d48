#include "phlab/drift.hpp"

#include <cmath>

#include "phlab/errors.hpp"
#include "phlab/leaves.hpp"
#include "phlab/normal_forms.hpp"
#include "phlab/rng.hpp"

namespace phlab {

namespace {

// The word seen from level ell: x_{-ell}, x_{-ell-1}, ...
PastWord sub_word(const Endomorphism& f, const PastWord& w, int ell) {
  const auto& pts = w.points();
  return PastWord::from_points(f, std::vector<TorusPoint>(pts.begin() + ell, pts.end()));
}

Vec2 unit_unstable(const Endomorphism& f, const PastWord& w) {
  const Trajectory tr(f, w, 0, 0);
  const Vec2 e = tr.unstable(0);
  return e / e.norm();
}

}  // namespace

DriftRecord y_configuration(const Endomorphism& f, const PastWord& x_word, const PastWord& y_word, double d_u,
                            double epsilon, int ell, const YConfigParams& params) {
  if (ell < 1 || ell >= x_word.depth() || ell >= y_word.depth()) {
    throw ConfigError("y_configuration: ell must lie in [1, word depth)");
  }
  if (torus_distance(x_word.at(ell), y_word.at(ell)) > 1e-12) {
    throw ConfigError("y_configuration: the words must share the point at level ell");
  }
  const double inv_beta = 1.0 / params.beta;
  if (!(d_u > inv_beta && d_u < 1.0)) throw ConfigError("y_configuration: unstable distance outside (1/beta, 1)");

  const PastWord xl = sub_word(f, x_word, ell);
  const PastWord yl = sub_word(f, y_word, ell);
  const Vec2 eux = unit_unstable(f, xl);
  Vec2 euy = unit_unstable(f, yl);
  if (euy.dot(eux) < 0.0) euy = -euy;
  DriftRecord r;
  r.ell = ell;
  r.d_u = d_u;
  r.alpha = angle_between(Direction::from_vector(eux), Direction::from_vector(euy));
  if (!(r.alpha > inv_beta)) {
    throw ConfigError("y_configuration: degenerate coupling, angle " + std::to_string(r.alpha) + " <= 1/beta");
  }

  const Trajectory tx(f, x_word, 0, 0);
  const double grow = std::exp(tx.log_cocycle(Bundle::unstable, -ell, ell));
  const Vec2 dx = eux * (d_u / grow);
  const Vec2 b = xl.base().coords();
  // center line through x^u_{-ell} meets the unstable line of y~_{-ell}; both are straight at this scale
  const Vec2 ec = center_field(f, b + dx).unit();
  const double den = ec.cross(euy);
  const double sigma = -dx.cross(euy) / den;
  Vec2 eta = ec * sigma;

  const Vec2 X0 = b + dx;
  const PastWord deep = match_past(f, xl, TorusPoint::wrap(X0));
  std::vector<TorusPoint> orbit(deep.points().rbegin(), deep.points().rend());
  Vec2 X = X0;
  for (int k = 0; k < ell; ++k) {
    X = TorusPoint::wrap(f.lift(X)).coords();
    orbit.push_back(TorusPoint::wrap(X));
  }
  const PastWord xu_word = PastWord::from_points(f, std::vector<TorusPoint>(orbit.rbegin(), orbit.rend()));
  const LyapunovNormParams lp = params.lyapunov.lambda > 0.0 ? params.lyapunov : default_lyapunov_params(f);
  const StoppingTimeRecord st = stopping_times(f, x_word, xu_word, epsilon, ell, lp);
  r.tau = st.tau;
  r.t = st.t;
  r.m = st.tau;

  // y^u stays on the center leaf of x^u. Iterating it directly would amplify rounding along
  // E^u by (lambda_u/lambda_c)^(ell+m), so after each step the displacement is slid along
  // E^u back onto the center leaf through the image of x^u.
  const Trajectory txu(f, xu_word, r.m, 0);
  for (int k = -ell; k < r.m; ++k) {
    const Vec2 Xk = txu.point(k).coords();
    const Vec2 img = f.displace(Xk, eta);
    const Vec2 Xn = txu.point(k + 1).coords();
    const Vec2 eu = txu.unstable(k + 1);
    Vec2 ecm = center_field(f, Xn).unit();
    for (int pass = 0; pass < 2; ++pass) {
      eta = ecm * (img.cross(eu) / ecm.cross(eu));
      ecm = oriented_unit(center_field(f, Xn + eta * 0.5), ecm);
    }
    eta = ecm * (img.cross(eu) / ecm.cross(eu));
    if (k + 1 == 0) r.center_displacement_before = eta.norm();
  }
  X = txu.point(r.m).coords();

  const PastWord xm = shift(f, xu_word, r.m);
  const double len = eta.norm();
  const CenterCurve cc = center_curve(f, xm.base(), 1.5 * len, len / 200.0);
  CurveHistory h(f, cc.curve, xm, Bundle::center, params.chart_depth);
  NormalChart chart = normal_chart(h);
  const Vec2 off = X - chart.curve.base_point();
  r.center_displacement_after = std::fabs(chart.R_of_point(X + eta - off));
  return r;
}

DriftSummary drift_experiment(const Endomorphism& f, const DriftExperimentParams& p) {
  if (p.count < 1 || p.ell_min < 1 || p.ell_max < p.ell_min) throw ConfigError("drift_experiment: bad ranges");
  YConfigParams cfg = p.config;
  if (!(cfg.lyapunov.lambda > 0.0)) cfg.lyapunov = default_lyapunov_params(f);
  const int depth = f.default_depth() + cfg.lyapunov.truncation_k + p.ell_max + 30;
  const CounterRng root(p.seed);
  DriftSummary s;
  for (int i = 0; i < p.count; ++i) {
    CounterRng rng = root.substream(static_cast<std::uint64_t>(i));
    bool done = false;
    for (int attempt = 0; attempt < p.max_attempts && !done; ++attempt) {
      Vec2 z;
      if (const auto& pert = f.spec().perturbation) {
        const Vec2 fu = pert->frame == PerturbationFrame::eigenframe ? f.eigen().e_u : Vec2{1.0, 0.0};
        const Vec2 fc = pert->frame == PerturbationFrame::eigenframe ? f.eigen().e_c : Vec2{0.0, 1.0};
        const double u = rng.uniform(-pert->a_box, pert->a_box);
        const double c = rng.uniform(-pert->a_box, pert->a_box);
        z = pert->q.coords() + fu * u + fc * c;
      } else {
        z = {rng.next_double(), rng.next_double()};
      }
      const TorusPoint zt = TorusPoint::wrap(z);
      const TorusPoint bt = f.evaluate(zt);
      const int ell = p.ell_min + static_cast<int>(rng.below(static_cast<std::uint64_t>(p.ell_max - p.ell_min + 1)));
      const double d_u = rng.uniform(p.d_u_min, p.d_u_max);
      const int bx = f.branch_index(zt, bt);
      const int by = static_cast<int>((static_cast<std::uint64_t>(bx) + 1 + rng.below(static_cast<std::uint64_t>(f.degree() - 1))) %
                                      static_cast<std::uint64_t>(f.degree()));
      const std::uint64_t sx = rng.next_u64(), sy = rng.next_u64();
      const PastWord xl = deepen(f, PastWord::from_branches(f, bt, {bx}), depth - ell - 1, BranchChooser::uniform(sx));
      const PastWord yl = deepen(f, PastWord::from_branches(f, bt, {by}), depth - ell - 1, BranchChooser::uniform(sy));
      const double alpha = angle_between(Direction::from_vector(unit_unstable(f, xl)),
                                         Direction::from_vector(unit_unstable(f, yl)));
      if (!(alpha > 1.0 / cfg.beta)) {
        ++s.rejected;
        continue;
      }
      s.records.push_back(y_configuration(f, shift(f, xl, ell), shift(f, yl, ell), d_u, p.epsilon, ell, cfg));
      done = true;
    }
    if (!done) {
      throw NumericalError("drift_experiment: no admissible configuration after " + std::to_string(p.max_attempts) +
                           " attempts");
    }
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(s.records.size());
  for (const DriftRecord& r : s.records) {
    const double ratio = r.center_displacement_after / p.epsilon;
    s.beta_hat = std::max({s.beta_hat, ratio, 1.0 / ratio});
    const double x = r.ell, y = std::log(r.center_displacement_before);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double var = sxx - sx * sx / n;
  s.before_slope = var > 0.0 ? (sxy - sx * sy / n) / var : 0.0;
  s.expected_slope = std::log(std::fabs(f.eigen().lambda_c / f.eigen().lambda_u));
  return s;
}

nlohmann::json to_json(const DriftRecord& r) {
  return {{"ell", r.ell},
          {"tau", r.tau},
          {"t", r.t},
          {"m", r.m},
          {"alpha", r.alpha},
          {"d_u", r.d_u},
          {"center_displacement_before", r.center_displacement_before},
          {"center_displacement_after", r.center_displacement_after}};
}

nlohmann::json to_json(const DriftSummary& s) {
  nlohmann::json recs = nlohmann::json::array();
  for (const DriftRecord& r : s.records) recs.push_back(to_json(r));
  return {{"records", recs},
          {"rejected", s.rejected},
          {"beta_hat", s.beta_hat},
          {"before_slope", s.before_slope},
          {"expected_slope", s.expected_slope}};
}

}  // namespace phlab
