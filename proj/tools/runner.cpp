#include "runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include "phlab/drift.hpp"
#include "phlab/errors.hpp"
#include "phlab/leaves.hpp"
#include "phlab/lyapunov.hpp"
#include "phlab/measures.hpp"
#include "phlab/normal_forms.hpp"
#include "phlab/parallel.hpp"
#include "phlab/rng.hpp"

namespace phlab::cli {

using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

json point_json(TorusPoint p) { return json::array({p.x(), p.y()}); }

TorusPoint default_point(const MapSpec& m) {
  if (m.perturbation) return m.perturbation->q;
  return wrap(0.3, 0.6);
}

double unstable_angle(const MapSpec& m) {
  const LinearEigenData e = linear_eigen_data(m.matrix);
  return Direction::from_vector(e.e_u).theta();
}

json defaults_for(const std::string& command, const MapSpec& m) {
  const json p = point_json(default_point(m));
  if (command == "certify-cones") {
    return {{"cone", {{"center_angle", unstable_angle(m)}, {"half_width", 0.3}}},
            {"ell", 1},
            {"grid_n", 64},
            {"interior_samples", 15}};
  }
  if (command == "exponents") return {{"n", 100000}, {"start", json::array({0.31, 0.67})}};
  if (command == "specialness") {
    return {{"point", p}, {"depth", 0}, {"samples", 1024}, {"through", json::array()}, {"fixed_branches", json::array()}};
  }
  if (command == "unstable-arc") {
    return {{"point", p}, {"depth", 0}, {"radius", 0.1}, {"resolution", 1e-3}, {"with_center", false}};
  }
  if (command == "minimality") {
    return {{"point", p},
            {"length", 1.0},
            {"iterations", 8},
            {"grid_n", 64},
            {"point_budget", 10000000},
            {"max_segment", 1e-3}};
  }
  if (command == "ugibbs") {
    return {{"point", p},
            {"length", 1.0},
            {"iterations", 12},
            {"grid_n", 32},
            {"cesaro", true},
            {"arcs", 1},
            {"reference_atoms", json::array()},
            {"point_budget", 10000000},
            {"max_segment", 1e-3}};
  }
  if (command == "normal-form-check") {
    TorusPoint z = default_point(m);
    if (m.perturbation) {
      // inside the support box, where the charts are not affine
      const LinearEigenData e = linear_eigen_data(m.matrix);
      const Perturbation& q = *m.perturbation;
      const Vec2 fu = q.frame == PerturbationFrame::eigenframe ? e.e_u : Vec2{1.0, 0.0};
      const Vec2 fc = q.frame == PerturbationFrame::eigenframe ? e.e_c : Vec2{0.0, 1.0};
      z = TorusPoint::wrap(q.q.coords() + fu * (0.6 * q.a_box) + fc * (0.3 * q.a_box));
    }
    return {{"point", point_json(z)},
            {"word_depth", 100},
            {"radius", 0.1},
            {"resolutions", json::array({2e-3, 1e-3, 5e-4})},
            {"unstable_depth", 40},
            {"center_depth", 60},
            {"rebase_vertex", 30}};
  }
  if (command == "stopping-times") {
    return {{"point", p},     {"epsilon", 0.01}, {"ell", 20},     {"ell_min", 10},
            {"ell_max", 30},  {"d_u", 0.5},      {"lambda", 0.0}, {"truncation_k", 40}};
  }
  if (command == "drift") {
    const DriftExperimentParams d;
    return {{"count", d.count},
            {"ell_min", d.ell_min},
            {"ell_max", d.ell_max},
            {"epsilon", d.epsilon},
            {"d_u_min", d.d_u_min},
            {"d_u_max", d.d_u_max},
            {"max_attempts", d.max_attempts},
            {"beta", d.config.beta},
            {"chart_depth", d.config.chart_depth},
            {"lambda", 0.0},
            {"truncation_k", 40}};
  }
  throw ConfigError("unknown command '" + command + "'");
}

MapSpec default_map(const std::string& command) {
  return command == "drift" ? MapSpec::example4() : MapSpec::f_B();
}

bool same_kind(const json& def, const json& v) {
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_number_integer()) {
    return v.is_number_integer() || (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>());
  }
  if (def.is_number()) return v.is_number();
  if (def.is_array()) return v.is_array();
  if (def.is_object()) return v.is_object();
  if (def.is_string()) return v.is_string();
  return true;
}

json merge_parameters(const std::string& command, const json& def, const json& given) {
  if (!given.is_object()) throw ConfigError("parameters must be an object");
  json out = def;
  for (const auto& [k, v] : given.items()) {
    if (!def.contains(k)) throw ConfigError("command '" + command + "' has no parameter '" + k + "'");
    if (!same_kind(def[k], v)) throw ConfigError("parameter '" + k + "' has the wrong type");
    out[k] = def[k].is_number_integer() ? json(v.get<long long>()) : v;
  }
  return out;
}

TorusPoint point_param(const json& p, const char* key) {
  const json& v = p.at(key);
  if (v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ConfigError(std::string("parameter '") + key + "' must be [x, y]");
  }
  return wrap(v[0].get<double>(), v[1].get<double>());
}

int int_param(const json& p, const char* key, int lo) {
  const long long v = p.at(key).get<long long>();
  if (v < lo || v > 1'000'000'000) throw ConfigError(std::string("parameter '") + key + "' out of range");
  return static_cast<int>(v);
}

double positive_param(const json& p, const char* key) {
  const double v = p.at(key).get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("parameter '") + key + "' must be positive");
  return v;
}

std::string render(const std::function<void(std::ostream&)>& fn) {
  std::ostringstream os;
  os << std::setprecision(17);
  fn(os);
  return os.str();
}

std::string coverage_csv(const CoverageReport& r) {
  return render([&](std::ostream& os) {
    os << "iteration,visited_fraction\n";
    for (std::size_t k = 0; k < r.visited_fraction.size(); ++k) os << k << ',' << r.visited_fraction[k] << '\n';
  });
}

int word_depth(const Endomorphism& f, int requested) { return requested > 0 ? requested : f.default_depth(); }

LyapunovNormParams lyapunov_from(const Endomorphism& f, const json& p) {
  const double lambda = p.at("lambda").get<double>();
  const int k = int_param(p, "truncation_k", 1);
  if (lambda == 0.0) return default_lyapunov_params(f, k);
  return LyapunovNormParams::make(lambda, k, center_exponent(f, wrap(0.31, 0.67), 10000, 0).value);
}

// ------------------------------------------------------------------ commands

void run_certify(const Endomorphism& f, const json& p, ReportBundle& b) {
  const json& c = p.at("cone");
  ConeField cone;
  if (c.contains("slope_lo") || c.contains("slope_hi")) {
    cone = ConeField::from_slopes(c.at("slope_lo").get<double>(), c.at("slope_hi").get<double>());
  } else if (c.contains("center_angle") && c.contains("half_width")) {
    cone = {Direction::from_angle(c.at("center_angle").get<double>()), c.at("half_width").get<double>()};
  } else {
    throw ConfigError("cone needs slope_lo/slope_hi or center_angle/half_width");
  }
  const ConeCertificate cert =
      certify_cones(f, cone, int_param(p, "ell", 1), int_param(p, "grid_n", 1), int_param(p, "interior_samples", 1));
  b.report["result"] = to_json(cert);
}

void run_exponents(const Endomorphism& f, const json& p, std::uint64_t seed, ReportBundle& b) {
  const long n = int_param(p, "n", 1);
  const TorusPoint start = point_param(p, "start");
  const ExponentEstimate c = center_exponent(f, start, n, seed);
  const ExponentEstimate u = unstable_exponent(f, start, n);
  const ExponentEstimate j = log_jacobian_average(f, start, n);
  b.report["result"] = {{"center", to_json(c)},
                        {"unstable", to_json(u)},
                        {"log_jacobian", to_json(j)},
                        {"sum_minus_jacobian", c.value + u.value - j.value}};
  b.tables.push_back({"exponents.csv", render([&](std::ostream& os) {
                        os << "quantity,value,n,std_error\n";
                        os << "center," << c.value << ',' << c.n << ',' << c.std_error << '\n';
                        os << "unstable," << u.value << ',' << u.n << ',' << u.std_error << '\n';
                        os << "log_jacobian," << j.value << ',' << j.n << ',' << j.std_error << '\n';
                      })});
}

void run_specialness(const Endomorphism& f, const json& p, std::uint64_t seed, ReportBundle& b) {
  const TorusPoint pt = point_param(p, "point");
  const int depth = word_depth(f, static_cast<int>(p.at("depth").get<long long>()));
  std::vector<PastWord> extra;
  const CounterRng root(seed);
  std::uint64_t stream = 1u << 20;
  for (const json& z : p.at("through")) {
    if (!z.is_array() || z.size() != 2) throw ConfigError("'through' entries must be [x, y]");
    const PastWord head = PastWord::from_points(f, {pt, wrap(z[0].get<double>(), z[1].get<double>())});
    extra.push_back(deepen(f, head, depth - 1, BranchChooser::uniform(root.substream(stream++).key())));
  }
  for (const json& k : p.at("fixed_branches")) {
    const int idx = k.get<int>();
    if (idx < 0 || idx >= f.degree()) throw ConfigError("fixed branch index out of range");
    extra.push_back(extend_past(f, pt, BranchChooser::fixed(idx), depth));
  }
  const SpecialnessReport r = specialness_probe(f, pt, depth, int_param(p, "samples", 2), seed, extra);
  b.report["result"] = to_json(r);
  b.tables.push_back({"angles.csv", render([&](std::ostream& os) {
                        os << "word,angle\n";
                        for (std::size_t i = 0; i < r.per_word_angles.size(); ++i) {
                          os << i << ',' << r.per_word_angles[i] << '\n';
                        }
                      })});
}

void run_unstable_arc(const Endomorphism& f, const json& p, std::uint64_t seed, ReportBundle& b) {
  const TorusPoint pt = point_param(p, "point");
  const int depth = word_depth(f, static_cast<int>(p.at("depth").get<long long>()));
  const double radius = positive_param(p, "radius"), res = positive_param(p, "resolution");
  const PastWord w = extend_past(f, pt, BranchChooser::uniform(seed), depth);
  const UnstableArc arc = unstable_arc(f, w, radius, res);
  const Polyline& c = arc.curve;
  const auto bi = static_cast<std::size_t>(c.base_index);
  const Vec2 chord = c.pts[std::min(bi + 1, c.size() - 1)] - c.pts[bi > 0 ? bi - 1 : 0];
  b.report["result"] = {{"vertices", c.size()},
                        {"length", c.length()},
                        {"max_segment", c.max_segment()},
                        {"base", point_json(w.base())},
                        {"base_tangency", angle_between(unstable_direction(f, w), Direction::from_vector(chord))}};
  b.tables.push_back({"arc.csv", render([&](std::ostream& os) { write_polyline_csv(os, c); })});
  if (p.at("with_center").get<bool>()) {
    const CenterCurve cc = center_curve(f, pt, radius, res);
    b.report["result"]["center_vertices"] = cc.curve.size();
    b.tables.push_back({"center.csv", render([&](std::ostream& os) { write_polyline_csv(os, cc.curve); })});
  }
}

void run_minimality(const Endomorphism& f, const json& p, ReportBundle& b) {
  const Polyline seg = linear_unstable_segment(f, point_param(p, "point"), positive_param(p, "length"));
  const auto budget = static_cast<std::size_t>(int_param(p, "point_budget", 1));
  auto emit = [&](const CoverageReport& r) {
    b.report["result"] = to_json(r);
    b.tables.push_back({"coverage.csv", coverage_csv(r)});
    b.tables.push_back({"mask.pbm", render([&](std::ostream& os) { write_mask_pbm(os, r); })});
  };
  try {
    emit(minimality_probe(f, seg, int_param(p, "iterations", 0), int_param(p, "grid_n", 1),
                          static_cast<double>(budget), positive_param(p, "max_segment")));
  } catch (const CoverageBudgetExceeded& e) {
    emit(e.partial());
    throw;
  }
}

void run_ugibbs(const Endomorphism& f, const json& p, std::uint64_t seed, ReportBundle& b) {
  const int arcs = int_param(p, "arcs", 1), iterations = int_param(p, "iterations", 1);
  const int grid_n = int_param(p, "grid_n", 1);
  const bool cesaro = p.at("cesaro").get<bool>();
  const double length = positive_param(p, "length"), max_seg = positive_param(p, "max_segment");
  const auto budget = static_cast<std::size_t>(int_param(p, "point_budget", 1));
  std::vector<std::pair<double, double>> atoms;
  for (const json& a : p.at("reference_atoms")) {
    if (!a.is_array() || a.size() != 2) throw ConfigError("reference atoms must be [y, weight]");
    atoms.emplace_back(a[0].get<double>(), a[1].get<double>());
  }
  const GridHistogram ref = product_measure_reference(atoms, grid_n);
  const GridHistogram uni = GridHistogram::uniform(grid_n);

  const CounterRng root(seed);
  std::vector<MeasureReport> reports;
  json per_arc = json::array();
  for (int k = 0; k < arcs; ++k) {
    TorusPoint start = point_param(p, "point");
    if (k > 0) {
      CounterRng rng = root.substream(static_cast<std::uint64_t>(k));
      start = wrap(rng.next_double(), rng.next_double());
    }
    const Polyline seg = linear_unstable_segment(f, start, length);
    try {
      reports.push_back(push_arc_measure(f, seg, iterations, grid_n, cesaro, budget, max_seg));
    } catch (const MeasureBudgetExceeded& e) {
      json partial = to_json(e.partial());
      partial["start"] = point_json(start);
      per_arc.push_back(partial);
      b.report["result"] = {{"arcs", per_arc}};
      throw;
    }
    json j = to_json(reports.back());
    j["start"] = point_json(start);
    j["tv_to_reference"] = tv_distance(reports.back().histogram, ref);
    per_arc.push_back(j);
  }
  double max_pair = 0.0;
  for (std::size_t a = 0; a < reports.size(); ++a) {
    for (std::size_t c = a + 1; c < reports.size(); ++c) {
      max_pair = std::max(max_pair, tv_distance(reports[a].histogram, reports[c].histogram));
    }
  }
  const GridHistogram& h = reports.front().histogram;
  std::vector<double> rows(static_cast<std::size_t>(grid_n));
  std::vector<double> ref_rows(static_cast<std::size_t>(grid_n));
  double row_dev = 0.0;
  for (int j = 0; j < grid_n; ++j) {
    rows[static_cast<std::size_t>(j)] = h.row_mass(j);
    ref_rows[static_cast<std::size_t>(j)] = ref.row_mass(j);
    row_dev = std::max(row_dev, std::fabs(rows[static_cast<std::size_t>(j)] - ref_rows[static_cast<std::size_t>(j)]));
  }
  b.report["result"] = {{"arcs", per_arc},
                        {"max_pairwise_tv", max_pair},
                        {"tv_to_uniform", tv_distance(h, uni)},
                        {"tv_to_reference", tv_distance(h, ref)},
                        {"row_mass", rows},
                        {"max_row_mass_deviation", row_dev},
                        {"center_exponent", reports.front().center_exponent}};
  b.tables.push_back({"histogram.csv", render([&](std::ostream& os) { write_histogram_csv(os, h); })});
  b.tables.push_back({"histogram.bin", render([&](std::ostream& os) { write_histogram_binary(os, h); })});
  b.tables.push_back({"tv_trace.csv", render([&](std::ostream& os) {
                        os << "arc,iteration,tv_to_uniform\n";
                        for (std::size_t a = 0; a < reports.size(); ++a) {
                          for (std::size_t k = 0; k < reports[a].tv_trace.size(); ++k) {
                            os << a << ',' << k << ',' << reports[a].tv_trace[k] << '\n';
                          }
                        }
                      })});
}

void run_normal_forms(const Endomorphism& f, const json& p, std::uint64_t seed, ReportBundle& b) {
  const TorusPoint z = point_param(p, "point");
  const int depth = int_param(p, "word_depth", 2);
  const double radius = positive_param(p, "radius");
  const int du = int_param(p, "unstable_depth", 1), dc = int_param(p, "center_depth", 1);
  std::vector<double> res;
  for (const json& r : p.at("resolutions")) {
    if (!r.is_number() || !(r.get<double>() > 0.0)) throw ConfigError("resolutions must be positive numbers");
    res.push_back(r.get<double>());
  }
  if (res.empty()) throw ConfigError("resolutions must not be empty");

  const PastWord w = extend_past(f, z, BranchChooser::uniform(seed), depth);
  json conj = json::array();
  std::string csv = "bundle,resolution,residual,lambda\n";
  auto record = [&](const char* name, double r, const ConjugacyCheck& c) {
    conj.push_back({{"bundle", name}, {"resolution", r}, {"residual", c.max_residual}, {"lambda", c.lambda}});
    csv += render([&](std::ostream& os) { os << name << ',' << r << ',' << c.max_residual << ',' << c.lambda << '\n'; });
  };
  std::vector<double> ru, rc;
  for (double r : res) {
    const ConjugacyCheck c = conjugacy_check(f, unstable_arc(f, w, radius, r).curve, w, Bundle::unstable, du);
    ru.push_back(c.max_residual);
    record("unstable", r, c);
  }
  for (double r : res) {
    const ConjugacyCheck c = conjugacy_check(f, center_curve(f, z, radius, r).curve, w, Bundle::center, dc);
    rc.push_back(c.max_residual);
    record("center", r, c);
  }
  auto ratios = [](const std::vector<double>& v) {
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) out.push_back(v[i] / v[i + 1]);
    return out;
  };

  // a word whose first step passes through z, so the arc at f(z) crosses the support
  const PastWord wi = deepen(f, PastWord::from_points(f, {f.evaluate(z), z}), depth - 1, BranchChooser::uniform(seed));
  const double chart_res = res[res.size() / 2];
  const UnstableArc arc = unstable_arc(f, wi, radius, chart_res);
  const CurveHistory h(f, arc.curve, wi, Bundle::unstable, du);
  const NormalChart ca = normal_chart(h);
  const int rv = int_param(p, "rebase_vertex", 0);
  if (static_cast<std::size_t>(rv) >= h.size()) throw ConfigError("rebase_vertex beyond the curve");
  const NormalChart cb = normal_chart(h, static_cast<std::size_t>(rv));
  const AffineCheckReport aff = affine_transition(ca, cb);
  const auto [rmin, rmax] = std::minmax_element(ca.rho.begin(), ca.rho.end());
  double arclength_dev = 0.0;
  for (std::size_t v = 0; v < ca.R.size(); ++v) {
    arclength_dev = std::max(arclength_dev, std::fabs(ca.R[v] - (ca.curve.s[v] - ca.curve.s[static_cast<std::size_t>(ca.base_index)])));
  }
  b.report["result"] = {{"conjugacy", conj},
                        {"unstable_refinement_ratios", ratios(ru)},
                        {"center_refinement_ratios", ratios(rc)},
                        {"affine", to_json(aff)},
                        {"rho_min", *rmin},
                        {"rho_max", *rmax},
                        {"max_R_minus_arclength", arclength_dev}};
  b.tables.push_back({"conjugacy.csv", csv});
  b.tables.push_back({"chart_unstable.csv", render([&](std::ostream& os) { write_chart_csv(os, ca); })});
}

void run_stopping_times(const Endomorphism& f, const json& p, std::uint64_t seed, ReportBundle& b) {
  const double eps = positive_param(p, "epsilon"), d_u = positive_param(p, "d_u");
  const int ell = int_param(p, "ell", 1), lo = int_param(p, "ell_min", 1), hi = int_param(p, "ell_max", 1);
  if (hi < lo) throw ConfigError("ell_max must be >= ell_min");
  const LyapunovNormParams lp = lyapunov_from(f, p);
  const int depth = f.default_depth() + lp.truncation_k + std::max(ell, hi) + 30;
  const PastWord w = extend_past(f, point_param(p, "point"), BranchChooser::uniform(seed), depth);
  const Vec2 eu = Trajectory(f, w, 0, 0).unstable(0);
  const TorusPoint xu = TorusPoint::wrap(w.base().coords() + eu * (d_u / eu.norm()));

  const StoppingTimeRecord main = stopping_times(f, w, xu, eps, ell, lp);
  std::vector<int> ells, taus, ts;
  for (int l = lo; l <= hi; ++l) {
    const StoppingTimeRecord r = stopping_times(f, w, xu, eps, l, lp);
    ells.push_back(l);
    taus.push_back(r.tau);
    ts.push_back(r.t);
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(ells.size());
  for (std::size_t i = 0; i < ells.size(); ++i) {
    sx += ells[i];
    sy += taus[i];
    sxx += static_cast<double>(ells[i]) * ells[i];
    sxy += static_cast<double>(ells[i]) * taus[i];
  }
  const double var = sxx - sx * sx / n;
  const double slope = var > 0.0 ? (sxy - sx * sy / n) / var : 0.0;
  double excess = 0.0;
  for (std::size_t i = 0; i < ells.size(); ++i) {
    for (std::size_t j = i + 1; j < ells.size(); ++j) {
      excess = std::max(excess, std::fabs(std::abs(taus[i] - taus[j]) - slope * std::abs(ells[i] - ells[j])));
    }
  }
  b.report["result"] = {{"tau", main.tau},
                        {"t", main.t},
                        {"lambda", lp.lambda},
                        {"truncation_k", lp.truncation_k},
                        {"tau_by_ell", taus},
                        {"t_by_ell", ts},
                        {"tau_slope", slope},
                        {"max_additive_excess", excess}};
  b.tables.push_back({"stopping_times.csv", render([&](std::ostream& os) {
                        os << "ell,tau,t\n";
                        for (std::size_t i = 0; i < ells.size(); ++i) os << ells[i] << ',' << taus[i] << ',' << ts[i] << '\n';
                      })});
  b.tables.push_back({"lyapunov_trace.csv", render([&](std::ostream& os) {
                        os << "k,lyapunov_cocycle\n";
                        for (std::size_t k = 0; k < main.lyapunov_trace.size(); ++k) {
                          os << k << ',' << main.lyapunov_trace[k] << '\n';
                        }
                      })});
}

void run_drift(const Endomorphism& f, const json& p, std::uint64_t seed, ReportBundle& b) {
  DriftExperimentParams d;
  d.count = int_param(p, "count", 1);
  d.ell_min = int_param(p, "ell_min", 1);
  d.ell_max = int_param(p, "ell_max", 1);
  d.epsilon = positive_param(p, "epsilon");
  d.d_u_min = positive_param(p, "d_u_min");
  d.d_u_max = positive_param(p, "d_u_max");
  d.max_attempts = int_param(p, "max_attempts", 1);
  d.seed = seed;
  d.config.beta = positive_param(p, "beta");
  d.config.chart_depth = int_param(p, "chart_depth", 1);
  d.config.lyapunov = lyapunov_from(f, p);
  const DriftSummary s = drift_experiment(f, d);
  b.report["result"] = to_json(s);
  b.tables.push_back({"drift.csv", render([&](std::ostream& os) {
                        os << "ell,tau,t,m,alpha,d_u,before,after\n";
                        for (const DriftRecord& r : s.records) {
                          os << r.ell << ',' << r.tau << ',' << r.t << ',' << r.m << ',' << r.alpha << ',' << r.d_u << ','
                             << r.center_displacement_before << ',' << r.center_displacement_after << '\n';
                        }
                      })});
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// ------------------------------------------------------------------ golden

const Tolerance* find_tolerance(const ToleranceTable& t, const std::string& path) {
  if (auto it = t.find(path); it != t.end()) return &it->second;
  std::string wild;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (path[i] == '[') {
      wild += "[*]";
      i = path.find(']', i);
    } else {
      wild += path[i];
    }
  }
  if (auto it = t.find(wild); it != t.end()) return &it->second;
  return nullptr;
}

void compare_node(const json& r, const json& g, const std::string& path, const ToleranceTable& tol,
                  GoldenComparison& out) {
  auto fail = [&](const std::string& why) {
    out.pass = false;
    out.failures.push_back(path + ": " + why);
  };
  if (g.is_object() && r.is_object()) {
    for (const auto& [k, v] : g.items()) {
      if (path.empty() && k == "metadata") continue;
      const std::string sub = path.empty() ? k : path + "." + k;
      if (!r.contains(k)) {
        out.pass = false;
        out.failures.push_back(sub + ": missing from report");
        continue;
      }
      compare_node(r[k], v, sub, tol, out);
    }
    for (const auto& [k, v] : r.items()) {
      if (path.empty() && k == "metadata") continue;
      if (!g.contains(k)) {
        out.pass = false;
        out.failures.push_back((path.empty() ? k : path + "." + k) + ": missing from golden");
      }
    }
    return;
  }
  if (g.is_array() && r.is_array()) {
    if (g.size() != r.size()) {
      fail("length " + std::to_string(r.size()) + " vs golden " + std::to_string(g.size()));
      return;
    }
    for (std::size_t i = 0; i < g.size(); ++i) compare_node(r[i], g[i], path + "[" + std::to_string(i) + "]", tol, out);
    return;
  }
  if (g.is_number() && r.is_number()) {
    const double a = r.get<double>(), e = g.get<double>();
    const Tolerance* t = find_tolerance(tol, path);
    const bool ok = t ? std::fabs(a - e) <= std::max(t->abs, t->rel * std::fabs(e)) : a == e;
    if (!ok) {
      std::ostringstream os;
      os << std::setprecision(17) << a << " vs golden " << e;
      fail(os.str());
    }
    return;
  }
  if (r != g) fail(r.dump() + " vs golden " + g.dump());
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"certify-cones", "exponents",         "specialness",
                                              "unstable-arc",  "minimality",        "ugibbs",
                                              "normal-form-check", "stopping-times", "drift"};
  return names;
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::vector<std::string> keys{"command", "map", "parameters", "seed", "output_dir"};
  for (const auto& [k, v] : j.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw ConfigError("unknown config field '" + k + "'");
  }
  ExperimentConfig c;
  try {
    c.command = j.at("command").get<std::string>();
    const auto& names = command_names();
    if (std::find(names.begin(), names.end(), c.command) == names.end()) {
      throw ConfigError("unknown command '" + c.command + "'");
    }
    c.map = j.contains("map") ? map_spec_from_json(j.at("map")) : default_map(c.command);
    c.parameters = merge_parameters(c.command, defaults_for(c.command, c.map),
                                    j.value("parameters", json::object()));
    if (j.contains("seed")) {
      const json& s = j.at("seed");
      if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
        throw ConfigError("seed must be a non-negative integer");
      }
      c.seed = s.get<std::uint64_t>();
    }
    c.output_dir = j.value("output_dir", c.output_dir);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

json to_json(const ExperimentConfig& c) {
  return {{"command", c.command},
          {"map", phlab::to_json(c.map)},
          {"parameters", c.parameters},
          {"seed", c.seed},
          {"output_dir", c.output_dir}};
}

ReportBundle run(const ExperimentConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  ReportBundle b;
  b.report["config"] = to_json(config);
  b.report["result"] = json::object();
  const Endomorphism f(config.map);
  const json& p = config.parameters;
  const std::string& cmd = config.command;
  try {
    if (cmd == "certify-cones") {
      run_certify(f, p, b);
    } else if (cmd == "exponents") {
      run_exponents(f, p, config.seed, b);
    } else if (cmd == "specialness") {
      run_specialness(f, p, config.seed, b);
    } else if (cmd == "unstable-arc") {
      run_unstable_arc(f, p, config.seed, b);
    } else if (cmd == "minimality") {
      run_minimality(f, p, b);
    } else if (cmd == "ugibbs") {
      run_ugibbs(f, p, config.seed, b);
    } else if (cmd == "normal-form-check") {
      run_normal_forms(f, p, config.seed, b);
    } else if (cmd == "stopping-times") {
      run_stopping_times(f, p, config.seed, b);
    } else if (cmd == "drift") {
      run_drift(f, p, config.seed, b);
    } else {
      throw ConfigError("unknown command '" + cmd + "'");
    }
    b.report["status"] = "ok";
  } catch (const NumericalError& e) {
    b.report["status"] = "numerical_error";
    b.report["error"] = e.what();
    b.exit_code = 3;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  b.metadata = {{"version", kVersion},
                {"wall_time_s", wall},
                {"timestamp", utc_timestamp()},
                {"threads", thread_count()},
                {"rng", "counter-splitmix64"}};
  return b;
}

void write_bundle(const ReportBundle& b, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  json full = b.report;
  full["metadata"] = b.metadata;
  auto put = [&](const std::string& name, const std::string& body) {
    std::ofstream os(fs::path(dir) / name, std::ios::binary);
    if (!os) throw ConfigError("cannot write '" + (fs::path(dir) / name).string() + "'");
    os << body;
  };
  put("report.json", full.dump(2) + "\n");
  for (const Table& t : b.tables) put(t.file, t.body);
}

ToleranceTable tolerance_table_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("tolerance table must be an object");
  ToleranceTable t;
  for (const auto& [k, v] : j.items()) {
    Tolerance tol;
    if (v.is_number()) {
      tol.abs = v.get<double>();
    } else if (v.is_object()) {
      tol.abs = v.value("abs", 0.0);
      tol.rel = v.value("rel", 0.0);
    } else {
      throw ConfigError("tolerance for '" + k + "' must be a number or {abs, rel}");
    }
    if (tol.abs < 0.0 || tol.rel < 0.0) throw ConfigError("tolerance for '" + k + "' is negative");
    t[k] = tol;
  }
  return t;
}

GoldenComparison compare_golden(const json& report, const json& golden, const ToleranceTable& tolerances) {
  GoldenComparison out;
  compare_node(report, golden, "", tolerances, out);
  return out;
}

}  // namespace phlab::cli
