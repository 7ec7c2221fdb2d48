#include "phlab/measures.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <iterator>

#include "phlab/leaves.hpp"
#include "phlab/parallel.hpp"

namespace phlab {

namespace {

constexpr char kMagic[8] = {'U', 'G', 'I', 'B', 'B', 'S', 'v', '1'};

double neumaier_sum(const std::vector<double>& v) {
  double s = 0.0, c = 0.0;
  for (double x : v) {
    const double t = s + x;
    c += std::fabs(s) >= std::fabs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  return s + c;
}

void normalize(GridHistogram& h) {
  const double t = h.total();
  if (!(t > 0.0)) throw NumericalError("histogram has no mass");
  for (double& m : h.mass) m /= t;
}

}  // namespace

GridHistogram GridHistogram::zeros(int n) {
  if (n < 1) throw ConfigError("GridHistogram: grid_n must be >= 1");
  return {n, std::vector<double>(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0)};
}

GridHistogram GridHistogram::uniform(int n) {
  GridHistogram h = zeros(n);
  const double m = 1.0 / static_cast<double>(h.mass.size());
  std::fill(h.mass.begin(), h.mass.end(), m);
  return h;
}

double GridHistogram::total() const { return neumaier_sum(mass); }

double GridHistogram::row_mass(int j) const {
  double s = 0.0;
  for (int i = 0; i < grid_n; ++i) s += at(i, j);
  return s;
}

GridHistogram arc_histogram(const std::vector<Vec2>& pts, int grid_n) {
  GridHistogram h = GridHistogram::zeros(grid_n);
  if (pts.size() < 2) {
    const TorusPoint p = TorusPoint::wrap(pts.at(0));
    const int i = std::min(grid_n - 1, static_cast<int>(p.x() * grid_n));
    const int j = std::min(grid_n - 1, static_cast<int>(p.y() * grid_n));
    h.mass[static_cast<std::size_t>(j) * grid_n + i] = 1.0;
    return h;
  }
  constexpr std::size_t kBlock = 4096;
  const std::size_t nseg = pts.size() - 1;
  const std::size_t nblocks = (nseg + kBlock - 1) / kBlock;
  std::vector<std::vector<double>> local(nblocks);
  parallel_for(nblocks, [&](std::size_t b) {
    std::vector<double>& m = local[b];
    m.assign(h.mass.size(), 0.0);
    const std::size_t hi = std::min(nseg, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < hi; ++i) {
      for_each_piece(pts[i], pts[i + 1], [&](Vec2 a, Vec2 e) {
        rasterize_segment(a, e, grid_n,
                          [&](int ci, int cj, double len) { m[static_cast<std::size_t>(cj) * grid_n + ci] += len; });
      });
    }
  });
  for (const auto& m : local) {
    for (std::size_t c = 0; c < m.size(); ++c) h.mass[c] += m[c];
  }
  normalize(h);
  return h;
}

MeasureReport push_arc_measure(const Endomorphism& f, const Polyline& arc, int iterations, int grid_n, bool cesaro,
                               std::size_t point_budget, double max_segment) {
  if (iterations < 1) throw ConfigError("push_arc_measure: iterations must be >= 1");
  MeasureReport r;
  r.window = cesaro ? std::max(1, iterations / 2) : 1;
  r.histogram = GridHistogram::zeros(grid_n);
  const GridHistogram uni = GridHistogram::uniform(grid_n);
  std::vector<Vec2> pts = arc.pts;
  auto record = [&](int k) {
    GridHistogram h = arc_histogram(pts, grid_n);
    r.tv_trace.push_back(tv_distance(h, uni));
    r.vertex_count = pts.size();
    if (k > iterations - r.window) {
      for (std::size_t c = 0; c < h.mass.size(); ++c) r.histogram.mass[c] += h.mass[c];
    }
    r.last_iterate = std::move(h);
    r.iterations = k;
  };
  record(0);
  for (int k = 1; k <= iterations; ++k) {
    pts = push_vertices(f, pts, max_segment, false);
    if (pts.size() > point_budget) {
      if (r.histogram.total() > 0.0) normalize(r.histogram);
      r.tv_to_uniform = tv_distance(r.histogram, uni);
      throw MeasureBudgetExceeded("push_arc_measure: point budget exceeded at iteration " + std::to_string(k), r);
    }
    record(k);
  }
  normalize(r.histogram);
  r.tv_to_uniform = tv_distance(r.histogram, uni);
  r.center_exponent = empirical_center_exponent(f, r.histogram);
  return r;
}

double tv_distance(const GridHistogram& a, const GridHistogram& b) {
  if (a.grid_n != b.grid_n || a.mass.size() != b.mass.size()) throw ConfigError("tv_distance: grid mismatch");
  std::vector<double> d(a.mass.size());
  for (std::size_t c = 0; c < d.size(); ++c) d[c] = std::fabs(a.mass[c] - b.mass[c]);
  return std::clamp(0.5 * neumaier_sum(d), 0.0, 1.0);
}

double empirical_center_exponent(const Endomorphism& f, const GridHistogram& h) {
  const int n = h.grid_n;
  std::vector<double> terms(h.mass.size(), 0.0);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t j) {
    for (int i = 0; i < n; ++i) {
      const std::size_t c = j * static_cast<std::size_t>(n) + static_cast<std::size_t>(i);
      if (h.mass[c] == 0.0) continue;
      const Vec2 x{(i + 0.5) / n, (static_cast<double>(j) + 0.5) / n};
      const Vec2 e = center_field(f, x).unit();
      terms[c] = h.mass[c] * std::log((f.derivative_at(x) * e).norm());
    }
  });
  return neumaier_sum(terms);
}

GridHistogram product_measure_reference(const std::vector<std::pair<double, double>>& atoms, int grid_n) {
  if (atoms.empty()) return GridHistogram::uniform(grid_n);
  GridHistogram h = GridHistogram::zeros(grid_n);
  for (const auto& [y, w] : atoms) {
    if (!(y >= 0.0 && y < 1.0)) throw ConfigError("product_measure_reference: atom outside [0,1)");
    if (!(w >= 0.0)) throw ConfigError("product_measure_reference: negative weight");
    const int j = std::min(grid_n - 1, static_cast<int>(y * grid_n));
    for (int i = 0; i < grid_n; ++i) h.mass[static_cast<std::size_t>(j) * grid_n + i] += w / grid_n;
  }
  normalize(h);
  return h;
}

void write_histogram_csv(std::ostream& os, const GridHistogram& h) {
  os << "i,j,mass\n" << std::setprecision(17);
  for (int j = 0; j < h.grid_n; ++j) {
    for (int i = 0; i < h.grid_n; ++i) os << i << ',' << j << ',' << h.at(i, j) << '\n';
  }
}

void write_histogram_binary(std::ostream& os, const GridHistogram& h) {
  os.write(kMagic, sizeof kMagic);
  for (double m : h.mass) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(m);
    char bytes[8];
    for (int k = 0; k < 8; ++k) bytes[k] = static_cast<char>((bits >> (8 * k)) & 0xFF);
    os.write(bytes, 8);
  }
}

GridHistogram read_histogram_binary(std::istream& is) {
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw ConfigError("histogram file: bad header");
  const std::vector<char> body((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (body.size() % 8 != 0) throw ConfigError("histogram file: truncated body");
  const std::size_t count = body.size() / 8;
  const auto n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(count))));
  if (n == 0 || n * n != count) throw ConfigError("histogram file: body is not a square grid");
  GridHistogram h = GridHistogram::zeros(static_cast<int>(n));
  for (std::size_t c = 0; c < count; ++c) {
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(body[8 * c + k])) << (8 * k);
    h.mass[c] = std::bit_cast<double>(bits);
  }
  return h;
}

nlohmann::json to_json(const MeasureReport& r) {
  return {{"grid_n", r.histogram.grid_n},
          {"tv_to_uniform", r.tv_to_uniform},
          {"center_exponent", r.center_exponent},
          {"iterations", r.iterations},
          {"window", r.window},
          {"vertex_count", r.vertex_count},
          {"tv_trace", r.tv_trace}};
}

}  // namespace phlab
