// Prints one PASS/FAIL line per acceptance criterion. With arguments, runs only the listed
// criteria. Exit status is the number of failing criteria (capped at 1).
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "phlab/drift.hpp"
#include "phlab/leaves.hpp"
#include "phlab/lyapunov.hpp"
#include "phlab/measures.hpp"
#include "phlab/normal_forms.hpp"
#include "phlab/rng.hpp"
#include "phlab/splitting.hpp"
#include "runner.hpp"

using namespace phlab;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    detail << (ok ? "" : "[x] ") << what << "; ";
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

const double kLambdaC = (5.0 - std::sqrt(5.0)) / 2.0;

// 1
void cone_certification(Outcome& o) {
  const Endomorphism fA(MapSpec::f_A()), fB(MapSpec::f_B());
  Stopwatch t;
  const ConeCertificate a = certify_cones(fA, ConeField::from_slopes(-0.5, 0.5), 1, 64);
  const double ta = t.seconds();
  Stopwatch t2;
  const ConeCertificate b = certify_cones(fB, ConeField::from_slopes(0.2, 1.2), 1, 64);
  const double tb = t2.seconds();
  const ConeCertificate v = certify_cones(fA, {Direction::from_angle(std::numbers::pi / 2), 0.3}, 1, 64);
  o.check(a.verified && a.sigma >= 2.68, "f_A sigma " + num(a.sigma));
  o.check(b.verified && b.sigma >= 3.4, "f_B sigma " + num(b.sigma));
  o.check(!v.verified, std::string("f_A vertical cone ") + (v.verified ? "verified" : "rejected"));
  o.check(ta < 1.0 && tb < 1.0, "runtime " + num(ta) + "s, " + num(tb) + "s");
}

// 2
void splitting_correctness(Outcome& o) {
  const Endomorphism f(MapSpec::f_B());
  Stopwatch t;
  const Direction eu = Direction::from_vector(f.eigen().e_u), ec = Direction::from_vector(f.eigen().e_c);
  double worst_eig = 0.0, worst_past = 0.0;
  const CounterRng root(2);
  const TorusPoint p = wrap(0.3, 0.6);
  const Direction ref = center_direction(f, p, 40);
  for (int i = 0; i < 100; ++i) {
    const PastWord w = extend_past(f, p, BranchChooser::uniform(root.substream(static_cast<std::uint64_t>(i)).key()), 40);
    const SplittingEstimate s = splitting(f, w);
    worst_eig = std::max({worst_eig, angle_between(s.e_u, eu), angle_between(s.e_c, ec)});
    worst_past = std::max(worst_past, angle_between(center_direction_via_past(f, w), ref));
  }
  const double secs = t.seconds();
  o.check(worst_eig <= 1e-9, "eigen deviation " + num(worst_eig));
  o.check(worst_past <= 1e-9, "E^c spread over 100 pasts " + num(worst_past));
  o.check(secs < 1.0, "runtime " + num(secs) + "s");
}

// 3
void center_exponents(Outcome& o) {
  Stopwatch t;
  const TorusPoint start = wrap(0.31, 0.67);
  const double a = center_exponent(Endomorphism(MapSpec::f_A()), start, 100000, 0).value;
  const double b = center_exponent(Endomorphism(MapSpec::f_B()), start, 100000, 0).value;
  const double e4 = center_exponent(Endomorphism(MapSpec::example4()), start, 100000, 0).value;
  const double secs = t.seconds();
  o.check(std::fabs(a - std::log(2.0)) <= 1e-12, "f_A " + num(a));
  o.check(std::fabs(b - std::log(kLambdaC)) <= 1e-3, "f_B " + num(b) + " vs " + num(std::log(kLambdaC)));
  o.check(std::fabs(e4 - b) <= 0.05, "example4 " + num(e4));
  o.check(secs < 5.0, "runtime " + num(secs) + "s");
}

// 4
void lyapunov_norm_and_cocycle(Outcome& o) {
  const Endomorphism f(MapSpec::f_B());
  const LyapunovNormParams p{0.5 * std::log(kLambdaC), 60};
  const PastWord w = extend_past(f, wrap(0.3, 0.6), BranchChooser::uniform(4), 120);
  const Trajectory tr(f, w, 60);
  const double ratio = lyapunov_unit_norm(tr, 0, p).value;
  const double oracle = std::sqrt(kLambdaC / (kLambdaC - 1.0));
  o.check(std::fabs(ratio - oracle) <= 1e-6, "norm ratio " + num(ratio) + " vs " + num(oracle));

  double worst_rel = 0.0;
  bool growth_ok = true;
  const CounterRng root(44);
  for (int i = 0; i < 20; ++i) {
    CounterRng rng = root.substream(static_cast<std::uint64_t>(i));
    const Endomorphism& g = f;
    const PastWord wi = extend_past(g, wrap(rng.next_double(), rng.next_double()), BranchChooser::uniform(rng.next_u64()), 120);
    const Trajectory ti(g, wi, 60);
    for (int n = 1; n <= 20; ++n) {
      for (int m = 1; m <= 20; m += 3) {
        for (const Bundle b : {Bundle::center, Bundle::unstable}) {
          const double whole = ti.log_cocycle(b, 0, n + m);
          const double split = ti.log_cocycle(b, 0, n) + ti.log_cocycle(b, n, m);
          worst_rel = std::max(worst_rel, std::fabs(std::expm1(split - whole)));
        }
        const double lw = log_lyapunov_cocycle(ti, 0, n + m, p);
        const double ls = log_lyapunov_cocycle(ti, 0, n, p) + log_lyapunov_cocycle(ti, n, m, p);
        worst_rel = std::max(worst_rel, std::fabs(std::expm1(ls - lw)));
      }
    }
    for (int n = 0; n <= 50; ++n) {
      growth_ok = growth_ok && log_lyapunov_cocycle(ti, 0, n, p) >= n * p.lambda - 1e-12;
    }
  }
  o.check(worst_rel <= 1e-10, "cocycle identity rel " + num(worst_rel));
  o.check(growth_ok, std::string("growth bound e^{n lambda} <= lambda-hat^c(n), n <= 50 ") + (growth_ok ? "holds" : "violated"));
}

// 5
void stopping_times_check(Outcome& o) {
  auto run = [](const MapSpec& spec, int ell) {
    const Endomorphism f(spec);
    const LyapunovNormParams p = default_lyapunov_params(f);
    const PastWord w = extend_past(f, wrap(0.3, 0.6), BranchChooser::uniform(5), f.default_depth() + 40 + 60);
    const Vec2 eu = Trajectory(f, w, 0, 0).unstable(0);
    const TorusPoint xu = TorusPoint::wrap(w.base().coords() + eu * (0.5 / eu.norm()));
    return stopping_times(f, w, xu, 0.01, ell, p);
  };
  const StoppingTimeRecord b = run(MapSpec::f_B(), 20);
  const StoppingTimeRecord a = run(MapSpec::f_A(), 20);
  o.check(b.tau == 74 && b.t == 74, "f_B tau " + std::to_string(b.tau) + " t " + std::to_string(b.t) + " (want 74)");
  o.check(a.tau == 27 && a.t == 27, "f_A tau " + std::to_string(a.tau) + " t " + std::to_string(a.t) + " (want 27)");

  std::vector<int> taus;
  for (int ell = 10; ell <= 30; ++ell) taus.push_back(run(MapSpec::f_B(), ell).tau);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double x = static_cast<double>(i);
    sx += x;
    sy += taus[i];
    sxx += x * x;
    sxy += x * taus[i];
  }
  const double n = static_cast<double>(taus.size());
  const double slope = (sxy - sx * sy / n) / (sxx - sx * sx / n);
  bool within = true;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    for (std::size_t j = i + 1; j < taus.size(); ++j) {
      const double d = static_cast<double>(j - i), dt = std::abs(taus[j] - taus[i]);
      within = within && dt <= 3.08 * d + 2.0 && dt >= 2.88 * d - 2.0;
    }
  }
  o.check(std::fabs(slope - 2.98) <= 0.1, "quasi-isometry slope " + num(slope));
  o.check(within, std::string("pairwise |tau(m)-tau(n)| within slope band plus 2 ") + (within ? "holds" : "violated"));
}

// 6
void specialness(Outcome& o) {
  Stopwatch t;
  const Endomorphism fA(MapSpec::f_A()), fB(MapSpec::f_B()), e3(MapSpec::example3()), e4(MapSpec::example4());
  const SpecialnessReport ra = specialness_probe(fA, wrap(0.3, 0.6), fA.default_depth(), 1024, 6);
  const SpecialnessReport rb = specialness_probe(fB, wrap(0.3, 0.6), fB.default_depth(), 1024, 6);
  const TorusPoint origin = wrap(0.0, 0.0);
  const PastWord via_q = deepen(e3, PastWord::from_points(e3, {origin, wrap(2.0 / 3.0, 0.5)}), 99, BranchChooser::uniform(3));
  const PastWord fixed = extend_past(e3, origin, BranchChooser::fixed(0), 100);
  const SpecialnessReport r3 = specialness_probe(e3, origin, 100, 64, 6, {via_q, fixed});
  const SpecialnessReport r4 = specialness_probe(e4, e4.spec().perturbation->q, e4.default_depth(), 1024, 6);
  const double secs = t.seconds();
  const double target = std::atan(4.0 * 0.01 / 3.0) - 1e-4;
  o.check(ra.angle_spread < 1e-8 && rb.angle_spread < 1e-8, "linear spreads " + num(ra.angle_spread) + ", " + num(rb.angle_spread));
  o.check(r3.angle_spread >= target, "example3 spread " + num(r3.angle_spread) + " vs " + num(target));
  o.check(r4.angle_spread > 1e-3, "example4 spread " + num(r4.angle_spread));
  o.check(secs < 10.0, "runtime " + num(secs) + "s");
}

// 7
void normal_forms(Outcome& o) {
  {
    const Endomorphism f(MapSpec::f_B());
    const PastWord w = extend_past(f, wrap(0.3, 0.6), BranchChooser::uniform(7), 100);
    double worst = 0.0;
    for (const Bundle b : {Bundle::unstable, Bundle::center}) {
      const Polyline c = b == Bundle::unstable ? unstable_arc(f, w, 0.1, 1e-3).curve : center_curve(f, w.base(), 0.1, 1e-3).curve;
      const NormalChart ch = normal_chart(CurveHistory(f, c, w, b, 40));
      for (std::size_t v = 0; v < ch.rho.size(); ++v) {
        worst = std::max({worst, std::fabs(ch.rho[v] - 1.0), std::fabs(ch.R[v] - ch.curve.s[v])});
      }
    }
    o.check(worst <= 1e-12, "linear rho and R deviation " + num(worst));
  }
  const Endomorphism f(MapSpec::example4());
  const Perturbation& q = *f.spec().perturbation;
  const TorusPoint z = TorusPoint::wrap(q.q.coords() + f.eigen().e_u * (0.6 * q.a_box) + f.eigen().e_c * (0.3 * q.a_box));
  const PastWord w = extend_past(f, z, BranchChooser::uniform(2), 100);
  for (const Bundle b : {Bundle::unstable, Bundle::center}) {
    std::vector<double> res;
    for (double r : {2e-3, 1e-3, 5e-4}) {
      const Polyline c = b == Bundle::unstable ? unstable_arc(f, w, 0.1, r).curve : center_curve(f, z, 0.1, r).curve;
      res.push_back(conjugacy_check(f, c, w, b, b == Bundle::unstable ? 40 : 60).max_residual);
    }
    const char* name = b == Bundle::unstable ? "unstable" : "center";
    o.check(res[0] <= 1e-4 && res[1] <= 1e-4 && res[2] <= 1e-4, std::string(name) + " conjugacy " + num(res[2]));
    o.check(res[0] / res[1] >= 3.5 && res[1] / res[2] >= 3.5,
            std::string(name) + " refinement ratios " + num(res[0] / res[1]) + ", " + num(res[1] / res[2]));
  }
  const PastWord wi = deepen(f, PastWord::from_points(f, {f.evaluate(z), z}), 99, BranchChooser::uniform(2));
  const CurveHistory h(f, unstable_arc(f, wi, 0.1, 1e-3).curve, wi, Bundle::unstable, 40);
  const AffineCheckReport a = affine_transition(normal_chart(h), normal_chart(h, 30));
  o.check(a.residual <= 1e-5, "affine residual " + num(a.residual));
  o.check(std::fabs(a.slope - a.expected_slope) <= 1e-4 && std::fabs(a.expected_slope - 1.0) > 1e-6,
          "affine slope " + num(a.slope) + " vs rho " + num(a.expected_slope));
}

// 8
void minimality(Outcome& o) {
  Stopwatch t;
  const Endomorphism fB(MapSpec::f_B()), e3(MapSpec::example3());
  const CoverageReport b = minimality_probe(fB, linear_unstable_segment(fB, wrap(0.3, 0.6), 1.0), 8, 64);
  const CoverageReport g = minimality_probe(e3, linear_unstable_segment(e3, wrap(0.1, 1.0 / 3.0), 1.0), 12, 64);
  const double secs = t.seconds();
  o.check(b.visited_fraction.back() >= 0.99, "f_B coverage " + num(b.visited_fraction.back()));
  bool confined = true;
  for (int j = 0; j < g.grid_n; ++j) {
    if (j == 21 || j == 42) continue;
    for (int i = 0; i < g.grid_n; ++i) confined = confined && g.final_mask[static_cast<std::size_t>(j * g.grid_n + i)] == 0;
  }
  o.check(confined && g.visited_fraction.back() <= 0.04,
          "example3 coverage " + num(g.visited_fraction.back()) + (confined ? " in rows 1/3, 2/3" : " leaked"));
  o.check(secs < 60.0, "runtime " + num(secs) + "s");
}

// 9
void ugibbs(Outcome& o) {
  const cli::ReportBundle b = cli::run(cli::parse_config({{"command", "ugibbs"}, {"map", "f_B"}, {"seed", 9}, {"parameters", {{"arcs", 10}}}}));
  const json& r = b.report["result"];
  double worst_arc = 0.0;
  for (const json& a : r["arcs"]) worst_arc = std::max(worst_arc, a["tv_to_uniform"].get<double>());
  o.check(worst_arc <= 0.05, "f_B tv to uniform " + num(worst_arc));
  o.check(r["max_pairwise_tv"].get<double>() <= 0.05, "pairwise tv " + num(r["max_pairwise_tv"].get<double>()));

  const json cfg3 = {{"command", "ugibbs"},
                     {"map", "example3"},
                     {"parameters",
                      {{"point", {0.1, 1.0 / 3.0}}, {"reference_atoms", {{1.0 / 3.0, 0.5}, {2.0 / 3.0, 0.5}}}}}};
  const json r3 = cli::run(cli::parse_config(cfg3)).report["result"];
  o.check(r3["max_row_mass_deviation"].get<double>() <= 0.01, "example3 row mass deviation " + num(r3["max_row_mass_deviation"].get<double>()));
  o.check(r3["tv_to_uniform"].get<double>() >= 0.9, "example3 tv to uniform " + num(r3["tv_to_uniform"].get<double>()));
}

// 10
void drift(Outcome& o) {
  Stopwatch t;
  const DriftSummary s = drift_experiment(Endomorphism(MapSpec::example4()), DriftExperimentParams{});
  const double secs = t.seconds();
  bool finite = s.records.size() == 100;
  for (const DriftRecord& r : s.records) {
    finite = finite && std::isfinite(r.center_displacement_after) && r.center_displacement_after > 0.0;
  }
  o.check(finite, std::to_string(s.records.size()) + " configurations, " + std::to_string(s.rejected) + " rejected");
  o.check(s.beta_hat <= 50.0, "fitted beta " + num(s.beta_hat));
  const double rel = std::fabs(s.before_slope / s.expected_slope - 1.0);
  o.check(rel <= 0.15, "pre-iteration slope " + num(s.before_slope) + " vs " + num(s.expected_slope));
  o.check(secs < 300.0, "runtime " + num(secs) + "s");
}

// 11
void determinism(Outcome& o) {
  const std::vector<json> configs = {
      {{"command", "certify-cones"}},
      {{"command", "exponents"}, {"parameters", {{"n", 20000}}}},
      {{"command", "specialness"}, {"map", "example4"}, {"parameters", {{"samples", 256}}}},
      {{"command", "unstable-arc"}, {"map", "example4"}, {"parameters", {{"with_center", true}}}},
      {{"command", "minimality"}, {"map", "example3"}, {"parameters", {{"point", {0.1, 1.0 / 3.0}}, {"iterations", 12}}}},
      {{"command", "ugibbs"}, {"parameters", {{"iterations", 8}, {"arcs", 2}}}},
      {{"command", "normal-form-check"}, {"map", "example4"}},
      {{"command", "stopping-times"}, {"map", "example4"}},
      {{"command", "drift"}, {"parameters", {{"count", 10}}}},
  };
  for (const json& c : configs) {
    json full = c;
    full["seed"] = 11;
    const cli::ExperimentConfig cfg = cli::parse_config(full);
    const cli::ReportBundle a = cli::run(cfg), b = cli::run(cfg);
    bool same = a.tables.size() == b.tables.size() && a.report == b.report;
    for (std::size_t i = 0; same && i < a.tables.size(); ++i) same = a.tables[i].body == b.tables[i].body;
    o.check(same && a.exit_code == 0, cfg.command + (same ? " identical" : " differs"));
  }
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, std::function<void(Outcome&)>>> criteria = {
      {1, {"cone certification", cone_certification}},
      {2, {"splitting correctness", splitting_correctness}},
      {3, {"center exponent", center_exponents}},
      {4, {"Lyapunov norm and cocycle", lyapunov_norm_and_cocycle}},
      {5, {"stopping times", stopping_times_check}},
      {6, {"specialness", specialness}},
      {7, {"normal forms", normal_forms}},
      {8, {"minimality probes", minimality}},
      {9, {"u-Gibbs estimation", ugibbs}},
      {10, {"drift experiment", drift}},
      {11, {"determinism", determinism}},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty()) {
    for (const auto& [k, v] : criteria) selected.push_back(k);
  }
  int failed = 0;
  for (int k : selected) {
    const auto it = criteria.find(k);
    if (it == criteria.end()) {
      std::printf("criterion %d: FAIL unknown criterion\n", k);
      ++failed;
      continue;
    }
    Outcome o;
    try {
      it->second.second(o);
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    std::printf("criterion %2d: %s  %s: %s\n", k, o.pass ? "PASS" : "FAIL", it->second.first, o.detail.str().c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
