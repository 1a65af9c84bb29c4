#include "dsreg/losses.hpp"
#include "dsreg/mind.hpp"
#include "dsreg/registration.hpp"
#include "dsreg/volume.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace dsreg;

namespace {

Volume3 random_volume(Dims d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    Volume3 v(d, {1, 1, 1});
    for (auto& x : v.data) x = dist(rng);
    return v;
}

DisplacementField random_field(Dims d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    DisplacementField f(d, {1, 1, 1});
    for (auto& x : f.data) x = dist(rng);
    return f;
}

void bm_warp(benchmark::State& state) {
    const int n = int(state.range(0));
    const Volume3 v = random_volume({n, n, n}, 1);
    const DisplacementField f = random_field({n, n, n}, 2);
    for (auto _ : state) benchmark::DoNotOptimize(warp(v, f));
    state.SetItemsProcessed(state.iterations() * v.dims.voxels());
}
BENCHMARK(bm_warp)->Arg(32)->Arg(64);

void bm_ssim_loss(benchmark::State& state) {
    const int n = int(state.range(0));
    const Volume3 a = random_volume({n, n, n}, 3);
    const Volume3 b = random_volume({n, n, n}, 4);
    for (auto _ : state) benchmark::DoNotOptimize(ssim_loss(a, b));
    state.SetItemsProcessed(state.iterations() * a.dims.voxels());
}
BENCHMARK(bm_ssim_loss)->Arg(32)->Arg(64);

void bm_mind(benchmark::State& state) {
    const int n = int(state.range(0));
    const Volume3 v = random_volume({n, n, n}, 5);
    for (auto _ : state) benchmark::DoNotOptimize(mind(v));
    state.SetItemsProcessed(state.iterations() * v.dims.voxels());
}
BENCHMARK(bm_mind)->Arg(32)->Arg(64);

void bm_fuse(benchmark::State& state) {
    const int n = int(state.range(0));
    const DisplacementField fo = random_field({n, n, n}, 6);
    const DisplacementField fs = random_field({n, n, n}, 7);
    FusionKernel k = FusionKernel::averaging();
    for (auto _ : state) benchmark::DoNotOptimize(fuse(fo, fs, k));
    state.SetItemsProcessed(state.iterations() * fo.dims.voxels());
}
BENCHMARK(bm_fuse)->Arg(32)->Arg(64);

void bm_smoothness(benchmark::State& state) {
    const int n = int(state.range(0));
    const DisplacementField f = random_field({n, n, n}, 8);
    for (auto _ : state) benchmark::DoNotOptimize(smoothness_loss(f));
    state.SetItemsProcessed(state.iterations() * f.dims.voxels());
}
BENCHMARK(bm_smoothness)->Arg(32)->Arg(64);

} // namespace

BENCHMARK_MAIN();
