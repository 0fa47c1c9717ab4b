#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "gdix/inversion.hpp"
#include "gdix/recovery.hpp"
#include "gdix/surfaces.hpp"

using namespace gdix;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

MetricField lens() {
  ConformalParams p;
  p.amplitude = -0.5;
  p.width = 0.5;
  return make_conformal(2, p);
}

Sigma0Spec lens_sigma0(const MetricField& m, std::vector<double> xhat) {
  Sigma0Spec s;
  s.center = vec2(0.6, 0.05);
  s.t0 = 2.0;
  s.axis = vec2(-1.0 / std::sqrt(m.eval(s.center)(0, 0)), 0.0);
  s.xhat_axes = {std::move(xhat)};
  return s;
}

void BM_Riemann(benchmark::State& state) {
  const MetricField m = lens();
  const Vec x = vec2(0.3, -0.2);
  for (auto _ : state) benchmark::DoNotOptimize(riemann(m, x));
}
BENCHMARK(BM_Riemann);

void BM_ShootGeodesic(benchmark::State& state) {
  const MetricField m = lens();
  const Vec x = vec2(-1.0, 0.1);
  const Vec eta = vec2(1.0, 0.0) / std::sqrt(m.eval(x)(0, 0));
  for (auto _ : state) benchmark::DoNotOptimize(shoot_geodesic(m, x, eta, 2.0, 0.005));
}
BENCHMARK(BM_ShootGeodesic)->Unit(benchmark::kMillisecond);

void BM_ForwardGeodesic(benchmark::State& state) {
  const MetricField m = lens();
  const Sigma0Spec s = lens_sigma0(m, {0.0});
  const TGrid grid = make_tgrid(0.005, 0.005, 2.6);
  for (auto _ : state) benchmark::DoNotOptimize(forward_dataset(m, s, grid));
}
BENCHMARK(BM_ForwardGeodesic)->Unit(benchmark::kMillisecond);

// Layer stripping along one lens geodesic through its caustic, per δt.
void BM_ReconstructLens(benchmark::State& state) {
  const double dt = 0.005 * static_cast<double>(state.range(0)) / 4.0;
  const MetricField m = lens();
  ForwardOptions fo;
  fo.dr = dt;
  const WavefrontDataset ds = forward_dataset(m, lens_sigma0(m, {0.0}), make_tgrid(dt, dt, 2.6), fo);
  const DataSlice slice = slice_from_dataset(ds, 0);
  InversionOptions io;
  io.dr = dt;
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct_along_geodesic(slice, 2.0, io));
  state.counters["dt"] = dt;
}
BENCHMARK(BM_ReconstructLens)->Arg(8)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_ReconstructStrictStep(benchmark::State& state) {
  const MetricField m = make_constant_curvature(2, 1.0);
  Sigma0Spec s;
  s.center = vec2(std::numbers::pi / 2, 0.0);
  s.t0 = 1.0;
  s.axis = vec2(0.0, 1.0);
  s.xhat_axes = {{0.0}};
  const WavefrontDataset ds = forward_dataset(m, s, make_tgrid(0.005, 0.005, 1.2));
  const DataSlice slice = slice_from_dataset(ds, 0);
  InversionOptions io;
  io.strict_step = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct_along_geodesic(slice, 0.3, io));
}
BENCHMARK(BM_ReconstructStrictStep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_RecoverChart(benchmark::State& state) {
  const MetricField m = lens();
  std::vector<double> xhat;
  for (int i = -4; i <= 4; ++i) xhat.push_back(0.025 * i);
  const WavefrontDataset ds = forward_dataset(m, lens_sigma0(m, xhat), make_tgrid(0.005, 0.005, 2.0));
  RecoveryOptions ro;
  ro.jobs = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(recover_chart(ds, 1.6, ro));
}
BENCHMARK(BM_RecoverChart)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_ChainDistance(benchmark::State& state) {
  FamilyOptions fo;
  fo.count = static_cast<std::size_t>(state.range(0));
  fo.disk_radius = 1.0;
  fo.disk_center = Vec::Zero(2);
  const auto fam =
      generate_surface_family(make_euclidean(2), Box{Vec::Constant(2, -1.0), Vec::Constant(2, 1.0)}, fo).first;
  ChainOptions co;
  co.snap_radius = 0.05;
  const ChainGraph graph(fam, co);
  for (auto _ : state) benchmark::DoNotOptimize(graph.distances_from(0));
  state.counters["points"] = static_cast<double>(graph.point_count());
}
BENCHMARK(BM_ChainDistance)->Arg(300)->Arg(3000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
