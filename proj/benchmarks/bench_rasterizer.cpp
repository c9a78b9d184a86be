#include <benchmark/benchmark.h>

#include "holo/rasterizer.hpp"
#include "holo/rng.hpp"

using namespace holo;

namespace {

GaussianSet make_set(int count, int channels, int width, int height) {
    GaussianSet set(count, channels);
    Rng rng(1234);
    for (int n = 0; n < count; ++n) {
        set.pre_position[2 * n] = rng.uniform(-1.2, 1.2);
        set.pre_position[2 * n + 1] = rng.uniform(-1.2, 1.2);
        set.pre_scale[2 * n] = rng.uniform(std::log(0.8), std::log(3.0));
        set.pre_scale[2 * n + 1] = rng.uniform(std::log(0.8), std::log(3.0));
        set.rotation[n] = rng.uniform(-3.0, 3.0);
        set.pre_opacity[n] = rng.uniform(-1.5, 1.5);
        for (int c = 0; c < channels; ++c) {
            set.amplitude[static_cast<size_t>(n) * channels + c] = rng.uniform();
            set.phase[static_cast<size_t>(n) * channels + c] = rng.uniform(-3.0, 3.0);
        }
    }
    (void)width;
    (void)height;
    return set;
}

void forward(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int side = static_cast<int>(state.range(1));
    const GaussianSet set = make_set(n, 1, side, side);
    for (auto _ : state) {
        const ComplexField field = rasterize_forward(set, side, side);
        benchmark::DoNotOptimize(field.real.data());
    }
    state.SetItemsProcessed(state.iterations() * n);
}

void backward(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int side = static_cast<int>(state.range(1));
    const GaussianSet set = make_set(n, 1, side, side);
    RealField gre(1, side, side), gim(1, side, side);
    Rng rng(99);
    for (auto& v : gre.values) v = rng.uniform(-1.0, 1.0);
    for (auto& v : gim.values) v = rng.uniform(-1.0, 1.0);
    for (auto _ : state) {
        const GaussianSetGrads grads = rasterize_backward(set, gre, gim);
        benchmark::DoNotOptimize(grads.pre_position.data());
    }
    state.SetItemsProcessed(state.iterations() * n);
}

}  // namespace

BENCHMARK(forward)->Args({256, 128})->Args({1024, 256})->Args({4096, 256})->Unit(benchmark::kMillisecond);
BENCHMARK(backward)->Args({256, 128})->Args({1024, 256})->Args({4096, 256})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
