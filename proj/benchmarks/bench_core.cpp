#include <benchmark/benchmark.h>

#include <vector>

#include "phlab/leaves.hpp"
#include "phlab/measures.hpp"
#include "phlab/natural_extension.hpp"
#include "phlab/rng.hpp"
#include "phlab/splitting.hpp"

namespace {

using namespace phlab;

const char* kMaps[] = {"f_A", "f_B", "example3", "example4"};

void BM_inverse_branches(benchmark::State& state) {
  const Endomorphism f(MapSpec::preset(kMaps[state.range(0)]));
  CounterRng rng(1);
  std::vector<TorusPoint> pts;
  for (int i = 0; i < 1024; ++i) pts.push_back(wrap(rng.next_double(), rng.next_double()));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(f.inverse_branches(pts[i++ & 1023]));
  }
  state.SetLabel(kMaps[state.range(0)]);
}
BENCHMARK(BM_inverse_branches)->DenseRange(0, 3);

void BM_extend_past(benchmark::State& state) {
  const Endomorphism f(MapSpec::example4());
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(extend_past(f, wrap(0.4, 0.8), BranchChooser::uniform(seed++), static_cast<int>(state.range(0))));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_extend_past)->Arg(40)->Arg(160);

void BM_unstable_pushforward(benchmark::State& state) {
  const Endomorphism f(MapSpec::example4());
  const PastWord w = extend_past(f, wrap(0.4, 0.8), BranchChooser::uniform(3), static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(unstable_direction(f, w));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_unstable_pushforward)->Arg(40)->Arg(160);

void BM_trajectory(benchmark::State& state) {
  const Endomorphism f(MapSpec::example4());
  const PastWord w = extend_past(f, wrap(0.4, 0.8), BranchChooser::uniform(3), 100);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Trajectory(f, w, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_trajectory)->Arg(0)->Arg(100);

void BM_center_exponent(benchmark::State& state) {
  const Endomorphism f(MapSpec::example4());
  for (auto _ : state) {
    benchmark::DoNotOptimize(center_exponent(f, wrap(0.31, 0.67), state.range(0), 0));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_center_exponent)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_rasterize(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  CounterRng rng(2);
  std::vector<Vec2> pts{{0.0, 0.0}};
  for (int i = 0; i < 4096; ++i) pts.push_back(pts.back() + Vec2{rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)});
  for (auto _ : state) {
    benchmark::DoNotOptimize(arc_histogram(pts, n));
  }
  state.SetItemsProcessed(state.iterations() * 4096);
}
BENCHMARK(BM_rasterize)->Arg(32)->Arg(256);

void BM_push_arc_measure(benchmark::State& state) {
  const Endomorphism f(MapSpec::f_B());
  const Polyline seg = linear_unstable_segment(f, wrap(0.3, 0.6), 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(push_arc_measure(f, seg, static_cast<int>(state.range(0)), 32, true));
  }
}
BENCHMARK(BM_push_arc_measure)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
