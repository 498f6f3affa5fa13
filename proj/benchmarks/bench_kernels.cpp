#include <benchmark/benchmark.h>

#include "usres/kernels.hpp"

namespace {

void bm_bspline_eval(benchmark::State& state) {
    const int order = static_cast<int>(state.range(0));
    double t = -2.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(usres::bspline_eval(t, order));
        t += 1e-4;
        if (t > 2.0) t = -2.0;
    }
}
BENCHMARK(bm_bspline_eval)->Arg(1)->Arg(3)->Arg(5);

void bm_kernel_eval(benchmark::State& state) {
    usres::KernelModel k{{0.2, 0.8, 1.0, 0.4}, 1.0, static_cast<int>(state.range(0))};
    double t = -2.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(usres::kernel_eval(k, t));
        t += 1e-4;
        if (t > 6.0) t = -2.0;
    }
}
BENCHMARK(bm_kernel_eval)->Arg(2)->Arg(3);

void bm_favard(benchmark::State& state) {
    const int order = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(usres::favard_constant(order));
}
BENCHMARK(bm_favard)->Arg(0)->Arg(3)->Arg(8);

void bm_fourier_coeffs(benchmark::State& state) {
    usres::KernelModel k{{1.0, 0.5}, 1.0, 3};
    const int max_index = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(usres::kernel_fourier_coeffs(k, 20.0, max_index));
    }
}
BENCHMARK(bm_fourier_coeffs)->Arg(4)->Arg(16)->Unit(benchmark::kMicrosecond);

}  // namespace
