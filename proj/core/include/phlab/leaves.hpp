#pragma once

#include <cstdint>
#include <json.hpp>
#include <ostream>
#include <vector>

#include "phlab/errors.hpp"
#include "phlab/lyapunov.hpp"
#include "phlab/natural_extension.hpp"
#include "phlab/polyline.hpp"

namespace phlab {

// Local unstable leaf of the past word; the curve's base vertex is the word's base point.
struct UnstableArc {
  PastWord past;
  Polyline curve;
};

struct CenterCurve {
  Polyline curve;
};

// Graph transform: a segment tangent to E^u(x~_{-k}) is pushed forward k times with
// refinement, then trimmed to arclength radius around the base. Requires
// (lambda_c/lambda_u)^depth < 1e-8 for the linear part.
UnstableArc unstable_arc(const Endomorphism& f, const PastWord& w, double radius, double resolution);

// E^c field used for center curves: center_direction at depth 30 with the linear seed.
Direction center_field(const Endomorphism& f, Vec2 X);
// RK4 along the center field with step-doubling control; a step rejected after 10 halvings throws.
CenterCurve center_curve(const Endomorphism& f, TorusPoint p, double radius, double resolution);

struct SpecialnessReport {
  TorusPoint base;
  int depth = 0;
  int sample_count = 0;
  double angle_spread = 0.0;
  std::vector<double> per_word_angles;  // theta of E^u per word, extra words last
};

// Sample i uses the uniform chooser keyed by substream i of seed, so growing `samples`
// only appends words. extra_words (e.g. a past through a chosen point) are appended.
SpecialnessReport specialness_probe(const Endomorphism& f, TorusPoint p, int depth, int samples,
                                    std::uint64_t seed, const std::vector<PastWord>& extra_words = {});

struct HolonomyResult {
  Vec2 lifted;          // near the lift of arc_x
  TorusPoint point;
  double displacement = 0.0;  // signed arclength travelled along the center curve
  double s_on_y = 0.0;        // arclength parameter of the crossing on arc_y
};

// Slides the point of arc_x at arclength s_u along its center curve until it meets arc_y.
HolonomyResult cs_holonomy(const Endomorphism& f, const UnstableArc& arc_x, const UnstableArc& arc_y, double s_u,
                           double search_radius = 0.2, double resolution = 1e-3);

struct CoverageReport {
  int grid_n = 0;
  std::vector<double> visited_fraction;  // entry k after k iterations
  std::vector<std::uint8_t> final_mask;  // row-major, index j * n + i for cell (i, j)
  std::size_t vertex_count = 0;
};

class CoverageBudgetExceeded : public NumericalError {
 public:
  CoverageBudgetExceeded(const std::string& what, CoverageReport partial)
      : NumericalError(what), partial_(std::move(partial)) {}
  const CoverageReport& partial() const { return partial_; }

 private:
  CoverageReport partial_;
};

// Marks the cells met by the lifted chain (positive-length pieces only).
void mark_cells(const std::vector<Vec2>& pts, int grid_n, std::vector<std::uint8_t>& mask);
CoverageReport minimality_probe(const Endomorphism& f, const Polyline& arc, int iterations, int grid_n,
                                std::size_t point_budget = 10'000'000, double max_segment = 1e-3);

// Straight segment of the given length along the linear unstable eigendirection, centered at p.
Polyline linear_unstable_segment(const Endomorphism& f, TorusPoint p, double length);

// CSV rows "s,x,y" with torus coordinates.
void write_polyline_csv(std::ostream& os, const Polyline& c);
// Plain PBM (P1), top row is the largest j.
void write_mask_pbm(std::ostream& os, const CoverageReport& r);

nlohmann::json to_json(const SpecialnessReport& r);
nlohmann::json to_json(const CoverageReport& r);

}  // namespace phlab
