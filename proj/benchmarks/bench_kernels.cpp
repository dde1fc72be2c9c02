// Serial reference kernels vs their OpenMP variants. Both modes produce
// bit-identical outputs (asserted in the test suite); this target measures
// what the parallel path buys on the build machine.
//
//   ./bench_kernels --benchmark_filter=band
//   OMP_NUM_THREADS=8 ./bench_kernels

#include <benchmark/benchmark.h>

#include <cpband/band_grid.hpp>
#include <cpband/geometry.hpp>
#include <cpband/operators.hpp>

using namespace cpband;

namespace {

Exec mode_of(const benchmark::State& state) {
    return state.range(0) ? Exec::Parallel : Exec::Serial;
}

const char* surface_name(int id) { return id == 0 ? "hemisphere" : "mobius"; }

Surface make_by_id(int id) {
    return id == 0 ? Surface::upper_hemisphere(1.0) : Surface::mobius_strip(1.0, 0.35);
}

const BandGrid& cached_band(int surface_id, double dx) {
    static BandGrid hemi = build_band(Surface::upper_hemisphere(1.0), 0.05);
    static BandGrid mob = build_band(Surface::mobius_strip(1.0, 0.35), 0.05);
    (void)dx;
    return surface_id == 0 ? hemi : mob;
}

void bench_band_build(benchmark::State& state) {
    Surface surf = make_by_id(static_cast<int>(state.range(1)));
    for (auto _ : state) {
        BandGrid grid = build_band(surf, 0.05, 3, 2, mode_of(state));
        benchmark::DoNotOptimize(grid.size());
    }
    state.SetLabel(surface_name(static_cast<int>(state.range(1))));
}

void bench_tube_operators(benchmark::State& state) {
    const BandGrid& grid = cached_band(static_cast<int>(state.range(1)), 0.05);
    for (auto _ : state) {
        TubeOperators ops = build_tube_operators(grid, mode_of(state));
        benchmark::DoNotOptimize(ops.gamma);
    }
    state.SetItemsProcessed(state.iterations() * grid.size());
    state.SetLabel(surface_name(static_cast<int>(state.range(1))));
}

void bench_interpolation(benchmark::State& state) {
    const BandGrid& grid = cached_band(0, 0.05);
    std::vector<Vec3> targets(grid.size());
    for (Index r = 0; r < grid.size(); ++r) targets[r] = grid.cpbar(r);
    for (auto _ : state) {
        SparseMat E = build_interpolation(grid, targets, mode_of(state));
        benchmark::DoNotOptimize(E.nonZeros());
    }
    state.SetItemsProcessed(state.iterations() * grid.size());
}

void bench_conormal(benchmark::State& state) {
    const BandGrid& grid = cached_band(0, 0.05);
    for (auto _ : state) {
        ConormalField field = approximate_conormal(grid, mode_of(state));
        benchmark::DoNotOptimize(field.direction.data());
    }
    state.SetItemsProcessed(state.iterations() * grid.exterior_count());
}

// range(0): 0 = serial, 1 = parallel; range(1): surface id.
BENCHMARK(bench_band_build)->ArgsProduct({{0, 1}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(bench_tube_operators)->ArgsProduct({{0, 1}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(bench_interpolation)->ArgsProduct({{0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(bench_conormal)->ArgsProduct({{0, 1}})->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
