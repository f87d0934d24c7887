#include <benchmark/benchmark.h>

#include "elastoplast/control.hpp"
#include "elastoplast/dynamics.hpp"
#include "elastoplast/ergodics.hpp"
#include "elastoplast/measure.hpp"

using namespace elastoplast;

namespace {

DriftModel model() {
    DriftModel m;
    m.f = [](double y, double) { return -y; };
    m.fy = [](double, double) { return -1.0; };
    m.fz = [](double, double) { return 0.0; };
    m.alpha = 1.0;
    m.c_lyap = 0.0;
    m.p = State{0.0, 0.0};
    m.smooth_radius = 0.5;
    m.t0 = 1.0;
    return m;
}

void BM_clamp_step(benchmark::State& state) {
    const auto m = model();
    State x{1.0, 0.2};
    for (auto _ : state) {
        x = clamp_step_unchecked(x, m, 1e-4, 1e-3);
        benchmark::DoNotOptimize(x);
    }
}
BENCHMARK(BM_clamp_step);

void BM_chain_step_white(benchmark::State& state) {
    const auto m = model();
    const IncrementSampler sampler(NoiseSpec::white(), m.t0, 1.0 / state.range(0));
    Rng rng(1);
    State x{1.0, 0.0};
    for (auto _ : state) {
        x = chain_step(x, m, sampler, rng);
        benchmark::DoNotOptimize(x);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_chain_step_white)->Arg(64)->Arg(256)->Arg(1000);

void BM_chain_step_decomposable(benchmark::State& state) {
    const auto m = model();
    DecomposableLaw law;
    law.b.assign(16, 0.0);
    for (int j = 0; j < 16; ++j) law.b[j] = std::pow(2.0, -j);
    law.J = 16;
    const IncrementSampler sampler(NoiseSpec::decomposable(law), m.t0, 1e-3);
    Rng rng(1);
    State x{1.0, 0.0};
    for (auto _ : state) {
        x = chain_step(x, m, sampler, rng);
        benchmark::DoNotOptimize(x);
    }
    state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_chain_step_decomposable);

void BM_histogram_add(benchmark::State& state) {
    EmpiricalMeasure mu(MeasureConfig{10.0, 200, 100});
    Rng rng(2);
    for (auto _ : state) {
        mu.add(State{rng.uniform(-9.0, 9.0), rng.uniform(-0.99, 0.99)});
    }
    benchmark::DoNotOptimize(mu.total());
}
BENCHMARK(BM_histogram_add);

void BM_kernel_tv(benchmark::State& state) {
    const auto m = model();
    const MeasureConfig bins{4.0, 48, 24};
    for (auto _ : state) {
        const double tv = estimate_kernel_tv(m, NoiseSpec::white(), State{0.1, 0.0},
                                             State{-0.1, 0.0}, static_cast<int>(state.range(0)),
                                             bins, 1.0 / 64, 3, 1);
        benchmark::DoNotOptimize(tv);
    }
}
BENCHMARK(BM_kernel_tv)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_coupling_kernel_build(benchmark::State& state) {
    const auto m = model();
    CouplingConfig cfg;
    cfg.aux_h = 1.0 / 64;
    Rng rng(4);
    for (auto _ : state) {
        const BinnedCouplingKernel kernel(m, NoiseSpec::white(), State{0.1, 0.0},
                                          State{-0.1, 0.0}, cfg, 1e-3, rng);
        benchmark::DoNotOptimize(kernel.tv());
    }
}
BENCHMARK(BM_coupling_kernel_build)->Unit(benchmark::kMillisecond);

void BM_synthesize_control(benchmark::State& state) {
    const auto m = model();
    for (auto _ : state) {
        const auto sched =
            synthesize_exact_control(State{0.5, 0.0}, State{-1.0, 0.0}, 4.0, m);
        benchmark::DoNotOptimize(sched.segments.size());
    }
}
BENCHMARK(BM_synthesize_control);

}  // namespace

BENCHMARK_MAIN();
