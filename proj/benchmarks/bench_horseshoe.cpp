#include <benchmark/benchmark.h>

#include <cmath>

#include "horseshoe/homoclinic.hpp"
#include "horseshoe/horseshoe_cert.hpp"
#include "horseshoe/invariant_sets.hpp"
#include "horseshoe/periodic_orbits.hpp"
#include "horseshoe/symbolic.hpp"

namespace {

using namespace horseshoe;

const HenonMap kHorseshoe = HenonMap::normal_form(1.0, -10.0);

void BM_MapStep(benchmark::State& state) {
  Point2 z{Complex{0.3, 0.1}, Complex{-0.2, 0.05}};
  const HenonMap F = HenonMap::normal_form(Complex{0.3, 0.0}, Complex{-0.1, 0.1});
  for (auto _ : state) {
    z = F.step(z);
    benchmark::DoNotOptimize(z);
  }
}
BENCHMARK(BM_MapStep);

void BM_Classify(benchmark::State& state) {
  const double x = 1.0 + std::sqrt(11.0);
  const int horizon = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(classify(kHorseshoe, Point2{x, x}, 4.5, horizon));
}
BENCHMARK(BM_Classify)->Arg(50)->Arg(200);

void BM_RenderSlice(benchmark::State& state) {
  SliceSpec spec;
  spec.window = PlaneWindow::around(0.0, 4.5, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(render_slice(kHorseshoe, spec, 4.5, 50, 1));
}
BENCHMARK(BM_RenderSlice)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Inequality(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(certify_inequality(kHorseshoe));
}
BENCHMARK(BM_Inequality);

void BM_ConeSweep(benchmark::State& state) {
  const SweepOptions opts{static_cast<int>(state.range(0)), 8};
  for (auto _ : state) {
    benchmark::DoNotOptimize(certify_cone_sweep(kHorseshoe, Bidisc::square(4.4), ConeField(1.0), opts));
  }
}
BENCHMARK(BM_ConeSweep)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_ComponentCount(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(component_count(kHorseshoe, Bidisc::square(4.4), Direction::fwd, 128));
  }
}
BENCHMARK(BM_ComponentCount)->Unit(benchmark::kMillisecond);

void BM_CountCycles(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(count_cycles(2, n));
}
BENCHMARK(BM_CountCycles)->Arg(12)->Arg(100);

void BM_EnumeratePeriodic(benchmark::State& state) {
  EnumerationOptions opts;
  opts.grid = 80;
  opts.workers = 1;
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_periodic(kHorseshoe, n, Bidisc::square(4.4), opts));
}
BENCHMARK(BM_EnumeratePeriodic)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_Itinerary(benchmark::State& state) {
  const HenonSystem system(kHorseshoe, Bidisc::square(4.4));
  const ComponentLabeling lab = build_labeling(system, 256);
  const double x = 1.0 + std::sqrt(11.0);
  const int h = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(itinerary(system, lab, Point2{x, x}, h, h));
}
BENCHMARK(BM_Itinerary)->Arg(2)->Arg(5);

void BM_RefinePoint(benchmark::State& state) {
  const HenonSystem system(kHorseshoe, Bidisc::square(4.4));
  const ComponentLabeling lab = build_labeling(system, 256);
  const SymbolWord w = SymbolWord::periodic({0, 1, 1}, 8, 8);
  for (auto _ : state) benchmark::DoNotOptimize(refine_point(system, lab, w));
}
BENCHMARK(BM_RefinePoint)->Unit(benchmark::kMicrosecond);

void BM_ParametrizeManifold(benchmark::State& state) {
  const HenonMap F = HenonMap::normal_form(0.3, -1.4);
  const SaddleData s = saddle_at(F, Point2{2.0, 2.0}, 1);
  const int order = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(parametrize_manifold(F, s, ManifoldKind::unstable, order));
}
BENCHMARK(BM_ParametrizeManifold)->Arg(20)->Arg(30)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
