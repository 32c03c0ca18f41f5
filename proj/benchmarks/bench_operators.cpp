// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <vector>

#include "beamscampi/cosparse_augment.hpp"
#include "beamscampi/lens_channel.hpp"
#include "beamscampi/selection_network.hpp"

using namespace beamscampi;

namespace {

Vector random_vector(int n, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> gauss;
    Vector x(n);
    for (int i = 0; i < n; ++i) {
        x[i] = gauss(rng);
    }
    return x;
}

void BM_Fwht(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Vector x = random_vector(static_cast<int>(n), 1);
    for (auto _ : state) {
        fwht(x.data(), n);
        benchmark::DoNotOptimize(x.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Fwht)->RangeMultiplier(4)->Range(1 << 8, 1 << 14);

void BM_NetworkApply(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const int mn = side * side;
    const SelectionNetwork net =
        reduce_phase_shifters(build_hadamard_selection(mn / 2, mn, 3), static_cast<double>(state.range(1)) / 100.0, 4);
    const Vector x = random_vector(mn, 2);
    const Vector y = random_vector(mn / 2, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(net.apply(x));
        benchmark::DoNotOptimize(net.apply_transpose(y));
    }
}
BENCHMARK(BM_NetworkApply)->Args({32, 0})->Args({32, 10})->Args({64, 0})->Args({64, 10});

void BM_AugmentedProducts(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const int mn = side * side;
    LensConfig cfg;
    cfg.rows = side;
    cfg.cols = side;
    Rng rng(5);
    const MultipathChannel ch = sample_channel(rng, 3, cfg);
    const SelectionNetwork net = build_hadamard_selection(mn / 2, mn, 6);
    const Measurement meas = measure(net, ch.h, 20.0, rng);
    const AugmentedSystem sys = augment(net, build_difference_operator(side, side), meas);
    const Vector x = random_vector(sys.dims().cols(), 7);
    const Vector y = random_vector(sys.dims().rows(), 8);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sys.apply(x));
        benchmark::DoNotOptimize(sys.apply_transpose(y));
        benchmark::DoNotOptimize(sys.apply_squared(x));
        benchmark::DoNotOptimize(sys.apply_squared_transpose(y));
    }
}
BENCHMARK(BM_AugmentedProducts)->Arg(32)->Arg(64);

}  // namespace
