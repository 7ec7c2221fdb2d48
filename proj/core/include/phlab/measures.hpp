#pragma once

#include <cstdint>
#include <istream>
#include <json.hpp>
#include <ostream>
#include <utility>
#include <vector>

#include "phlab/errors.hpp"
#include "phlab/polyline.hpp"

namespace phlab {

// Masses over the half-open cells [i/n, (i+1)/n) x [j/n, (j+1)/n), stored at j * n + i.
struct GridHistogram {
  int grid_n = 0;
  std::vector<double> mass;

  static GridHistogram zeros(int n);
  static GridHistogram uniform(int n);
  double at(int i, int j) const { return mass[static_cast<std::size_t>(j) * grid_n + i]; }
  double total() const;
  double row_mass(int j) const;
};

struct MeasureReport {
  GridHistogram histogram;     // Cesaro average, or the last iterate when cesaro is off
  GridHistogram last_iterate;
  double tv_to_uniform = 0.0;
  double center_exponent = 0.0;
  int iterations = 0;
  int window = 0;  // number of iterates averaged
  std::size_t vertex_count = 0;
  std::vector<double> tv_trace;  // tv to uniform of each iterate's own histogram, iterate 0 first
};

class MeasureBudgetExceeded : public NumericalError {
 public:
  MeasureBudgetExceeded(const std::string& what, MeasureReport partial)
      : NumericalError(what), partial_(std::move(partial)) {}
  const MeasureReport& partial() const { return partial_; }

 private:
  MeasureReport partial_;
};

// Normalized arclength of the lifted chain split over cells by exact segment-cell intersection.
GridHistogram arc_histogram(const std::vector<Vec2>& pts, int grid_n);

// Pushes the arc `iterations` times. The Cesaro window is the last max(1, iterations / 2)
// iterates, each normalized before averaging.
MeasureReport push_arc_measure(const Endomorphism& f, const Polyline& arc, int iterations, int grid_n, bool cesaro,
                               std::size_t point_budget = 10'000'000, double max_segment = 1e-3);

// Half the l1 distance; throws ConfigError on a grid mismatch.
double tv_distance(const GridHistogram& a, const GridHistogram& b);

// sum of mass times log ||Df|E^c|| at the cell centers.
double empirical_center_exponent(const Endomorphism& f, const GridHistogram& h);

// Lebesgue in x times nu in y; an empty atom list means nu is Lebesgue.
// Atoms are (position in [0,1), weight) and the weights are normalized.
GridHistogram product_measure_reference(const std::vector<std::pair<double, double>>& atoms, int grid_n);

// CSV rows "i,j,mass".
void write_histogram_csv(std::ostream& os, const GridHistogram& h);
// "UGIBBSv1" then n*n little-endian doubles in the mass order above; n is read off the length.
void write_histogram_binary(std::ostream& os, const GridHistogram& h);
GridHistogram read_histogram_binary(std::istream& is);

nlohmann::json to_json(const MeasureReport& r);

}  // namespace phlab
