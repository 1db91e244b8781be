#include <benchmark/benchmark.h>

#include "faacaf/dsp.hpp"
#include "faacaf/echo.hpp"
#include "faacaf/imaging.hpp"

namespace {
using namespace faacaf;

FabricConfig bench_fabric() {
  FabricConfig fabric;
  ClipOnModule mod;
  mod.id = 0;
  mod.anchor = {0.0, 0.0, 0.0};
  mod.axis = {1.0, 0.0, 0.0};
  mod.aperture_length_m = 0.1;
  mod.passband = {0, 60e9, 66e9};
  fabric.modules.push_back(mod);
  return fabric;
}

RawDataCube bench_cube(int num_states, int evolutions) {
  const Band band{60e9, 66e9};
  const FabricConfig fabric = bench_fabric();
  const ChirpSchedule schedule =
      build_schedule(band, {fabric.modules[0].passband}, num_states, 80e6,
                     40e-6, 200e-9, evolutions, 2e6);
  NoiseSpec noise;
  noise.reference_snr_db = 20.0;
  noise.seed = 7;
  const std::vector<Target> scene = {{{0.05, 0.5, 0.0}, 1.0, 0.0}};
  return synthesize_beat(schedule, fabric, {}, scene, noise, 5.0);
}

void BM_RangeProfile(benchmark::State& state) {
  const RawDataCube cube = bench_cube(8, 1);
  for (auto _ : state) {
    RangeProfile p = range_profile(cube, 0, 0, Window::kHann, 4);
    benchmark::DoNotOptimize(p.bins.data());
  }
}
BENCHMARK(BM_RangeProfile);

void BM_SynthesizeCube(benchmark::State& state) {
  for (auto _ : state) {
    RawDataCube cube = bench_cube(static_cast<int>(state.range(0)), 1);
    benchmark::DoNotOptimize(cube.samples.data());
  }
}
BENCHMARK(BM_SynthesizeCube)->Arg(16)->Arg(64);

void BM_Focus(benchmark::State& state) {
  const RawDataCube cube = bench_cube(64, 1);
  const FabricConfig fabric = bench_fabric();
  std::vector<RangeProfile> profiles;
  UsableSet usable;
  usable.threshold_db = 10.0;
  for (int m = 0; m < cube.num_states; ++m) {
    profiles.push_back(range_profile(cube, m, 0, Window::kHann, 4));
    usable.states.push_back(m);
  }
  const ImagingGrid grid = ImagingGrid::planar(
      {-0.1, 0.4, 0.0}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, 0.2, 0.2,
      static_cast<double>(state.range(0)) * 1e-3);
  const PositionMap map = [&fabric](double f) {
    return nominal_map(fabric, f);
  };
  for (auto _ : state) {
    FocusedImage image = focus(profiles, map, grid, usable);
    benchmark::DoNotOptimize(image.values.data());
  }
}
BENCHMARK(BM_Focus)->Arg(10)->Arg(5);

}  // namespace

BENCHMARK_MAIN();
