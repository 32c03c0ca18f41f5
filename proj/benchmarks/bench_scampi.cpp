// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "beamscampi/lens_channel.hpp"
#include "beamscampi/scampi.hpp"

using namespace beamscampi;

namespace {

struct Problem {
    MultipathChannel channel;
    SelectionNetwork net;
    Measurement meas;
};

Problem make_problem(int side) {
    LensConfig cfg;
    cfg.rows = side;
    cfg.cols = side;
    Rng rng(11);
    Problem p;
    p.channel = sample_channel(rng, 3, cfg);
    p.net = build_hadamard_selection(side * side / 2, side * side, 12);
    p.meas = measure(p.net, p.channel.h, 30.0, rng);
    return p;
}

void BM_ScampiSweep(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const Problem p = make_problem(side);
    const AugmentedSystem sys = augment(p.net, build_difference_operator(side, side), p.meas);
    const ScampiOptions opts;
    ScampiState s = init_state(sys, opts);
    for (int k = 0; k < 20; ++k) {
        scampi_iterate(s, sys, opts);
    }
    const ScampiState warm = s;
    for (auto _ : state) {
        state.PauseTiming();
        s = warm;
        state.ResumeTiming();
        scampi_iterate(s, sys, opts);
    }
}
BENCHMARK(BM_ScampiSweep)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_EmScampiSolve(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const Problem p = make_problem(side);
    const AugmentedSystem sys = augment(p.net, build_difference_operator(side, side), p.meas);
    ScampiOptions opts;
    opts.prior_kind = PriorKind::bernoulli_gaussian;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_em_scampi(sys, opts));
    }
}
BENCHMARK(BM_EmScampiSolve)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace
