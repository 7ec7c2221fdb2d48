#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "phlab/errors.hpp"
#include "phlab/leaves.hpp"
#include "phlab/measures.hpp"

using namespace phlab;

TEST(Histogram, SegmentMassFollowsArclength) {
  const GridHistogram h = arc_histogram({{0.1, 0.3}, {0.6, 0.3}, {0.6, 0.55}}, 4);
  EXPECT_NEAR(h.total(), 1.0, 1e-15);
  // 0.5 horizontal in row 1, then 0.2 vertical in row 1 and 0.05 in row 2
  EXPECT_NEAR(h.row_mass(1), 0.7 / 0.75, 1e-15);
  EXPECT_NEAR(h.row_mass(2), 0.05 / 0.75, 1e-15);
  EXPECT_NEAR(h.at(0, 1), 0.15 / 0.75, 1e-15);
}

TEST(Histogram, WrapsAcrossTheTorus) {
  const GridHistogram h = arc_histogram({{0.9, 0.5}, {1.3, 0.5}}, 10);
  EXPECT_NEAR(h.at(9, 5), 0.25, 1e-14);
  EXPECT_NEAR(h.at(0, 5), 0.25, 1e-14);
  EXPECT_NEAR(h.at(2, 5), 0.25, 1e-14);
}

TEST(Histogram, TotalVariation) {
  const GridHistogram u = GridHistogram::uniform(8);
  EXPECT_EQ(tv_distance(u, u), 0.0);
  GridHistogram d = GridHistogram::zeros(8);
  d.mass[0] = 1.0;
  EXPECT_NEAR(tv_distance(u, d), 1.0 - 1.0 / 64.0, 1e-15);
  EXPECT_THROW(tv_distance(u, GridHistogram::uniform(4)), ConfigError);
}

TEST(Histogram, ProductReference) {
  const GridHistogram r = product_measure_reference({{1.0 / 3.0, 1.0}, {2.0 / 3.0, 1.0}}, 32);
  EXPECT_NEAR(r.row_mass(10), 0.5, 1e-15);
  EXPECT_NEAR(r.row_mass(21), 0.5, 1e-15);
  EXPECT_NEAR(r.at(5, 10), 0.5 / 32.0, 1e-15);
  EXPECT_EQ(tv_distance(product_measure_reference({}, 16), GridHistogram::uniform(16)), 0.0);
  EXPECT_THROW(product_measure_reference({{1.5, 1.0}}, 8), ConfigError);
}

TEST(Histogram, BinaryRoundTrip) {
  GridHistogram h = GridHistogram::zeros(3);
  for (std::size_t i = 0; i < h.mass.size(); ++i) h.mass[i] = 0.1 * static_cast<double>(i) + 1e-17;
  std::stringstream ss;
  write_histogram_binary(ss, h);
  EXPECT_EQ(ss.str().size(), 8u + 9u * 8u);
  EXPECT_EQ(ss.str().substr(0, 8), "UGIBBSv1");
  const GridHistogram r = read_histogram_binary(ss);
  EXPECT_EQ(r.grid_n, 3);
  EXPECT_EQ(r.mass, h.mass);

  std::stringstream bad("UGIBBSv2xxxxxxxx");
  EXPECT_THROW(read_histogram_binary(bad), ConfigError);
  std::stringstream ragged(std::string("UGIBBSv1") + std::string(24, '\0'));
  EXPECT_THROW(read_histogram_binary(ragged), ConfigError);
}

TEST(Histogram, LittleEndianLayout) {
  GridHistogram h = GridHistogram::zeros(1);
  h.mass[0] = 1.0;
  std::stringstream ss;
  write_histogram_binary(ss, h);
  const std::string body = ss.str().substr(8);
  EXPECT_EQ(static_cast<unsigned char>(body[7]), 0x3F);
  EXPECT_EQ(static_cast<unsigned char>(body[6]), 0xF0);
  EXPECT_EQ(static_cast<unsigned char>(body[0]), 0x00);
}

TEST(Histogram, Csv) {
  GridHistogram h = GridHistogram::zeros(2);
  h.mass = {0.25, 0.5, 0.125, 0.125};
  std::ostringstream os;
  write_histogram_csv(os, h);
  EXPECT_EQ(os.str(), "i,j,mass\n0,0,0.25\n1,0,0.5\n0,1,0.125\n1,1,0.125\n");
}

TEST(PushArcMeasure, LinearMapEquidistributes) {
  const Endomorphism f(MapSpec::f_B());
  const MeasureReport r = push_arc_measure(f, linear_unstable_segment(f, wrap(0.3, 0.6), 1.0), 8, 16, true);
  EXPECT_EQ(r.window, 4);
  EXPECT_EQ(r.tv_trace.size(), 9u);
  EXPECT_LT(r.tv_to_uniform, 0.05);
  EXPECT_LT(r.tv_trace.back(), r.tv_trace.front());
  EXPECT_NEAR(r.center_exponent, std::log((5.0 - std::sqrt(5.0)) / 2.0), 1e-9);
}

TEST(PushArcMeasure, Example3StaysOnTheThirds) {
  const Endomorphism f(MapSpec::example3());
  // the arc alternates between the rows, so the window needs an even number of iterates
  const MeasureReport r = push_arc_measure(f, linear_unstable_segment(f, wrap(0.1, 1.0 / 3.0), 1.0), 12, 32, true);
  EXPECT_NEAR(r.histogram.row_mass(10), 0.5, 1e-9);
  EXPECT_NEAR(r.histogram.row_mass(21), 0.5, 1e-9);
  EXPECT_GE(r.tv_to_uniform, 0.9);
  EXPECT_NEAR(r.center_exponent, std::log(2.0), 1e-12);
}

TEST(PushArcMeasure, LastIterateWithoutCesaro) {
  const Endomorphism f(MapSpec::f_B());
  const MeasureReport r = push_arc_measure(f, linear_unstable_segment(f, wrap(0.3, 0.6), 1.0), 3, 8, false);
  EXPECT_EQ(r.window, 1);
  EXPECT_EQ(r.histogram.mass, r.last_iterate.mass);
}

TEST(PushArcMeasure, BudgetCarriesPartialReport) {
  const Endomorphism f(MapSpec::example4());
  try {
    push_arc_measure(f, linear_unstable_segment(f, wrap(0.4, 0.8), 1.0), 12, 16, true, 2000);
    FAIL() << "budget not enforced";
  } catch (const MeasureBudgetExceeded& e) {
    EXPECT_FALSE(e.partial().tv_trace.empty());
  }
}

TEST(CenterExponent, UniformHistogramForLinearMap) {
  const Endomorphism f(MapSpec::f_B());
  EXPECT_NEAR(empirical_center_exponent(f, GridHistogram::uniform(16)), std::log((5.0 - std::sqrt(5.0)) / 2.0), 1e-12);
}
