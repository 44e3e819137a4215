#include <benchmark/benchmark.h>

#include <array>

#include "csd/analysis.hpp"
#include "csd/charge.hpp"
#include "csd/eigen3x3.hpp"
#include "csd/scan.hpp"
#include "csd/spin.hpp"

using namespace csd;

static void BM_EvolveCharge(benchmark::State& state) {
  const IlluminationStep step{{1.9, 0.6}, 2.0};
  double rho = 0.1;
  for (auto _ : state) {
    rho = evolve_charge(ChargeState(rho), step).rho_minus() * 0.5;
    benchmark::DoNotOptimize(rho);
  }
}
BENCHMARK(BM_EvolveCharge);

static void BM_PointSequence(benchmark::State& state) {
  Scene scene;
  scene.nvs.resize(2);
  scene.nvs[1].position = {100, 0};
  const auto seq = preset_sequence(SequenceKind::rcsd);
  for (auto _ : state) benchmark::DoNotOptimize(run_sequence_at_point(scene, seq, {20, 5}));
}
BENCHMARK(BM_PointSequence);

static void BM_Scan(benchmark::State& state) {
  Scene scene;
  scene.nvs.resize(2);
  scene.nvs[1].position = {100, 0};
  const auto seq = preset_sequence(SequenceKind::rcsd);
  const auto grid = ScanGrid::centered({50, 0}, 2.0, 101, 101);
  ScanOptions opt;
  opt.seed = 1;
  opt.threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(simulate_scan(scene, seq, grid, opt));
  state.SetItemsProcessed(state.iterations() * 101 * 101);
}
BENCHMARK(BM_Scan)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();

static void BM_EigenSymmetric(benchmark::State& state) {
  const Matrix3 h{{{2875.0, 30.0, 0.0}, {30.0, 0.0, 30.0}, {0.0, 30.0, 2865.0}}};
  for (auto _ : state) benchmark::DoNotOptimize(eigen_symmetric(h));
}
BENCHMARK(BM_EigenSymmetric);

static void BM_InferField(benchmark::State& state) {
  const std::array<FrequencyObservation, 2> obs{{{0, 2.852, 2.894}, {1, 2.837, 2.908}}};
  for (auto _ : state) benchmark::DoNotOptimize(infer_field(obs));
}
BENCHMARK(BM_InferField)->Unit(benchmark::kMicrosecond);

static void BM_FitChargeDecay(benchmark::State& state) {
  std::vector<DataPoint> pts;
  for (int i = 0; i < 50; ++i) {
    const double t = 0.1 * i;
    pts.push_back({t, 0.75 - 0.7 * std::exp(-2.7 * t)});
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit_charge_decay(pts));
}
BENCHMARK(BM_FitChargeDecay)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
