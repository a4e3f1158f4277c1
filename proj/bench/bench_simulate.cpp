#include <benchmark/benchmark.h>

#include <string>

#include "affine/io.hpp"
#include "affine/simulate.hpp"

using namespace affine;

namespace {

AffineModel model(int which) {
  static const char* names[] = {"cir", "compound_poisson", "wishart_2d"};
  return load_model(std::string(AFFINE_MODELS_DIR) + "/" + names[which] + ".json");
}

Vec start(const AffineModel& m) {
  if (m.dim() == 3) return (Vec(3) << 1.0, 0.0, 1.0).finished();
  return Vec::Ones(m.dim());
}

SimConfig config(benchmark::State& state) {
  SimConfig c;
  c.n_paths = static_cast<int>(state.range(1));
  c.dt = 1e-3;
  c.horizon = 0.5;
  c.seed = 1;
  return c;
}

void BM_Serial(benchmark::State& state) {
  const AffineModel m = model(static_cast<int>(state.range(0)));
  const SimConfig c = config(state);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_paths_serial(m, start(m), c));
  state.SetItemsProcessed(state.iterations() * c.n_paths * 500);
}

void BM_OpenMP(benchmark::State& state) {
  const AffineModel m = model(static_cast<int>(state.range(0)));
  const SimConfig c = config(state);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_paths(m, start(m), c));
  state.SetItemsProcessed(state.iterations() * c.n_paths * 500);
}

}  // namespace

BENCHMARK(BM_Serial)->ArgsProduct({{0, 1, 2}, {2000}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OpenMP)->ArgsProduct({{0, 1, 2}, {2000}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
