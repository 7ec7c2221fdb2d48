#pragma once

#include <json.hpp>
#include <ostream>
#include <vector>

#include "phlab/leaves.hpp"
#include "phlab/splitting.hpp"

namespace phlab {

// Backward orbits of the vertices of a curve through the base of a past word. Level i holds
// the lifts of v_{-i}, matched to the word by continuation from the base vertex, together with
// the bundle direction there.
class CurveHistory {
 public:
  // The curve's base vertex must project to w.base(). Unstable directions are pushed forward
  // from level `depth`, center directions pulled back from the center field at level 0.
  CurveHistory(const Endomorphism& f, const Polyline& curve, const PastWord& w, Bundle bundle, int depth);

  Bundle bundle() const { return bundle_; }
  int depth() const { return depth_; }
  const Polyline& curve() const { return curve_; }
  const PastWord& word() const { return word_; }
  std::size_t size() const { return curve_.size(); }
  Vec2 vertex(int level, std::size_t v) const { return levels_[static_cast<std::size_t>(level)][v]; }
  Vec2 direction(int level, std::size_t v) const { return dirs_[static_cast<std::size_t>(level)][v]; }
  // log ||Df(v_{-i})|E(v_{-i})|| for i in [1, depth].
  double log_stretch(int i, std::size_t v) const { return logs_[static_cast<std::size_t>(i)][v]; }

  // log rho_a(b) = sum_{i=1..depth} log lambda(a_{-i}) - log lambda(b_{-i}).
  double log_rho(std::size_t a, std::size_t b) const;
  // |lambda(a_{-depth}) / lambda(b_{-depth}) - 1|
  double last_factor_deviation(std::size_t a, std::size_t b) const;

 private:
  Bundle bundle_;
  int depth_;
  Polyline curve_;
  PastWord word_;
  std::vector<std::vector<Vec2>> levels_, dirs_;
  std::vector<std::vector<double>> logs_;
};

struct DensityProfile {
  int base_index = 0;
  int truncation_depth = 0;
  std::vector<double> rho;
  double max_last_factor_deviation = 0.0;
};

// rho_base(target) for the given vertex; throws NumericalError if the last factor differs
// from 1 by more than 1e-6.
double density_rho(const CurveHistory& h, std::size_t base, std::size_t target);
DensityProfile density_profile(const CurveHistory& h, std::size_t base);

// R by trapezoid quadrature of rho against arclength; between vertices rho is linear, so R is
// piecewise quadratic and Phi = R^{-1} solves a quadratic on one segment.
struct NormalChart {
  Polyline curve;
  int base_index = 0;
  int truncation_depth = 0;
  std::vector<double> rho;
  std::vector<double> R;

  double R_min() const { return R.front(); }
  double R_max() const { return R.back(); }
  double R_at_arclength(double s) const;
  double arclength_at(double r) const;
  // Lifted point with chart coordinate r; throws ConfigError outside the chart.
  Vec2 phi(double r) const;
  // Chart coordinate of the orthogonal projection of p on the nearest segment.
  double R_of_point(Vec2 p) const;
};

NormalChart normal_chart(const CurveHistory& h, std::size_t base);
inline NormalChart normal_chart(const CurveHistory& h) {
  return normal_chart(h, static_cast<std::size_t>(h.curve().base_index));
}

struct AffineCheckReport {
  double slope = 0.0;
  double offset = 0.0;
  double residual = 0.0;
  // rho_b(a) and R_b(a), the values the fit should reproduce
  double expected_slope = 0.0;
  double expected_offset = 0.0;
};

// Least-squares fit of R_b against R_a over the shared vertices.
AffineCheckReport affine_transition(const NormalChart& a, const NormalChart& b);

struct ConjugacyCheck {
  double lambda = 0.0;      // ||Df(x)|E(x~)||
  double max_residual = 0.0;  // sup |R_{f x}(f y) - lambda R_x(y)|
  std::size_t vertices = 0;
};

// Builds the chart of the image curve on the shifted word and compares vertex by vertex.
ConjugacyCheck conjugacy_check(const Endomorphism& f, const Polyline& curve, const PastWord& w, Bundle bundle,
                               int depth);

struct CuChartParams {
  double center_radius = 0.1;
  double unstable_radius = 0.1;
  double resolution = 1e-3;
  int truncation_depth = 40;
};

// Phi(t, s) = Phi^u_{y}(beta(s) t) with y = Phi^c(s) and beta(s) = rho^u_y(x).
class CuChart {
 public:
  CuChart(const Endomorphism& f, const PastWord& w, CuChartParams params = {});

  const NormalChart& center_chart() const { return center_; }
  double beta(double s) const;
  // Lift near the lift of the base point.
  Vec2 lifted(double t, double s) const;
  TorusPoint operator()(double t, double s) const { return TorusPoint::wrap(lifted(t, s)); }

 private:
  PastWord word_at(double s, Vec2& y_lift) const;

  const Endomorphism* f_;
  PastWord w_;
  CuChartParams p_;
  NormalChart center_;
  std::vector<double> base_logs_;  // log lambda^u(x_{-i}), i = 1..N
};

void write_chart_csv(std::ostream& os, const NormalChart& c);

nlohmann::json to_json(const DensityProfile& d);
nlohmann::json to_json(const AffineCheckReport& r);
nlohmann::json to_json(const ConjugacyCheck& c);

}  // namespace phlab
