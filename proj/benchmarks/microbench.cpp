// Copyright (c) 2026 The resil authors
//
// SPDX-License-Identifier: Apache-2.0
//
// Microbenchmarks for the scheduling and resiliency hot paths. These
// complement the campaign driver: they measure single-operation costs, not
// end-to-end sweeps.

#include <benchmark/benchmark.h>

#include <optional>
#include <vector>

#include "resil/pool.hpp"
#include "resil/resiliency.hpp"
#include "resil/runtime.hpp"
#include "resil/stencil.hpp"

namespace {

// One pool for the whole benchmark binary; per-iteration pool start/stop
// would dominate every measurement.
resil::TaskPool& pool() {
    static resil::TaskPool instance({resil::default_worker_count(),
        resil::QueuePolicy::work_stealing});
    return instance;
}

void bm_spawn_join(benchmark::State& state) {
    pool();
    for (auto _ : state) {
        auto h = resil::spawn([] { return 42; });
        benchmark::DoNotOptimize(h.get());
    }
}
BENCHMARK(bm_spawn_join);

void bm_dataflow_join(benchmark::State& state) {
    pool();
    for (auto _ : state) {
        std::vector<resil::TaskHandle<int>> deps{resil::TaskHandle<int>::resolved(21)};
        auto h = resil::dataflow(
            [](const std::vector<int>& vs) { return 2 * vs[0]; }, std::move(deps));
        benchmark::DoNotOptimize(h.get());
    }
}
BENCHMARK(bm_dataflow_join);

void bm_async_replay(benchmark::State& state) {
    pool();
    const unsigned n = static_cast<unsigned>(state.range(0));
    for (auto _ : state) {
        auto h = resil::async_replay(n, [] { return 42; });
        benchmark::DoNotOptimize(h.get());
    }
}
BENCHMARK(bm_async_replay)->Arg(1)->Arg(3);

void bm_async_replicate(benchmark::State& state) {
    pool();
    const unsigned n = static_cast<unsigned>(state.range(0));
    for (auto _ : state) {
        auto h = resil::async_replicate(n, [] { return 42; });
        benchmark::DoNotOptimize(h.get());
    }
}
BENCHMARK(bm_async_replicate)->Arg(1)->Arg(3);

void bm_replicate_vote_validate(benchmark::State& state) {
    pool();
    for (auto _ : state) {
        auto h = resil::async_replicate_vote_validate(
            3, &resil::majority_vote<int>, [](int v) { return v == 42; }, [] { return 42; });
        benchmark::DoNotOptimize(h.get());
    }
}
BENCHMARK(bm_replicate_vote_validate);

void bm_lw_step(benchmark::State& state) {
    auto field = resil::initial_field(1, static_cast<unsigned>(state.range(0)));
    for (auto _ : state) {
        auto out = resil::lw_step(field, 0.9);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_lw_step)->Arg(512)->Arg(16000);

void bm_subdomain_advance(benchmark::State& state) {
    auto field = resil::initial_field(3, 512);
    std::vector<double> left(field.begin(), field.begin() + 512);
    std::vector<double> mid(field.begin() + 512, field.begin() + 1024);
    std::vector<double> right(field.begin() + 1024, field.begin() + 1536);
    for (auto _ : state) {
        auto out = resil::advance_subdomain(left, mid, right, 8, 0.9);
        benchmark::DoNotOptimize(out.values.data());
    }
}
BENCHMARK(bm_subdomain_advance);

}  // namespace

BENCHMARK_MAIN();
