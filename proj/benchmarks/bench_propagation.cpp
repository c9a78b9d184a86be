#include <benchmark/benchmark.h>

#include <cmath>

#include "holo/propagation.hpp"
#include "holo/rng.hpp"

using namespace holo;

namespace {

ComplexField make_field(int channels, int height, int width) {
    ComplexField f(channels, height, width);
    Rng rng(4321);
    for (size_t i = 0; i < f.size(); ++i) {
        f.real[i] = rng.uniform(-1.0, 1.0);
        f.imag[i] = rng.uniform(-1.0, 1.0);
    }
    return f;
}

PropagationSpec gray_spec(int pad) {
    PropagationSpec s;
    s.wavelengths = {532e-9};
    s.pad_factor = pad;
    return s;
}

void single_plane(benchmark::State& state) {
    const int h = static_cast<int>(state.range(0));
    const int w = static_cast<int>(state.range(1));
    const ComplexField u = make_field(1, h, w);
    const PropagationSpec spec = gray_spec(2);
    for (auto _ : state) {
        const ComplexField out = propagate(u, spec, 3e-3);
        benchmark::DoNotOptimize(out.real.data());
    }
}

void multi_plane(benchmark::State& state) {
    const int h = static_cast<int>(state.range(0));
    const int w = static_cast<int>(state.range(1));
    const ComplexField u = make_field(1, h, w);
    const PropagationSpec spec = gray_spec(2);
    const std::vector<double> distances{2e-3, 4e-3};
    for (auto _ : state) {
        const std::vector<ComplexField> outs = propagate_multi(u, spec, distances);
        benchmark::DoNotOptimize(outs.front().real.data());
    }
}

void round_trip(benchmark::State& state) {
    const int h = static_cast<int>(state.range(0));
    const int w = static_cast<int>(state.range(1));
    const ComplexField u = make_field(1, h, w);
    const PropagationSpec spec = gray_spec(2);
    for (auto _ : state) {
        const ComplexField out = propagate_backward(propagate(u, spec, 3e-3), spec, 3e-3);
        benchmark::DoNotOptimize(out.real.data());
    }
}

}  // namespace

BENCHMARK(single_plane)->Args({160, 256})->Args({320, 512})->Unit(benchmark::kMillisecond);
BENCHMARK(multi_plane)->Args({160, 256})->Args({320, 512})->Unit(benchmark::kMillisecond);
BENCHMARK(round_trip)->Args({160, 256})->Args({320, 512})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
