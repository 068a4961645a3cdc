// Copyright (c) 2026 The resil authors
//
// SPDX-License-Identifier: Apache-2.0

#include "resil/bench.hpp"

#include <atomic>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "resil/resiliency.hpp"
#include "resil/runtime.hpp"

namespace resil {
namespace {

const std::vector<std::pair<Variant, std::string>>& variant_names() {
    static const std::vector<std::pair<Variant, std::string>> names = {
        {Variant::baseline, "baseline"},
        {Variant::async_replay, "async_replay"},
        {Variant::async_replay_validate, "async_replay_validate"},
        {Variant::async_replicate, "async_replicate"},
        {Variant::async_replicate_validate, "async_replicate_validate"},
        {Variant::async_replicate_vote, "async_replicate_vote"},
        {Variant::async_replicate_vote_validate, "async_replicate_vote_validate"},
        {Variant::dataflow_replay, "dataflow_replay"},
        {Variant::dataflow_replay_validate, "dataflow_replay_validate"},
        {Variant::dataflow_replicate, "dataflow_replicate"},
        {Variant::dataflow_replicate_validate, "dataflow_replicate_validate"},
        {Variant::dataflow_replicate_vote, "dataflow_replicate_vote"},
        {Variant::dataflow_replicate_vote_validate, "dataflow_replicate_vote_validate"},
    };
    return names;
}

bool is42(int v) noexcept { return v == 42; }
int vote42(std::vector<int> results) { return majority_vote(std::move(results)); }

struct RunTotals {
    std::vector<double> walls;
    std::uint64_t executions = 0;
    std::uint64_t failures = 0;
    std::uint64_t failed_handles = 0;
};

void validate_config(const ArtificialConfig& cfg) {
    if (cfg.task_count < 1)
        throw std::invalid_argument("artificial: task_count must be >= 1");
    if (!(cfg.error_p >= 0.0 && cfg.error_p < 1.0))
        throw std::invalid_argument("artificial: error_p must be in [0, 1)");
    if (cfg.n < 1)
        throw std::invalid_argument("artificial: n must be >= 1");
    if (cfg.runs < 1)
        throw std::invalid_argument("artificial: runs must be >= 1");
}

template <typename Task>
TaskHandle<int> launch(Variant variant, unsigned n, const Task& task) {
    // Dataflow variants join one pre-resolved dependency so the dependency
    // machinery is on the measured path.
    auto df_task = [task](const std::vector<int>&) { return task(); };
    std::vector<TaskHandle<int>> dep{TaskHandle<int>::resolved(0)};
    switch (variant) {
    case Variant::baseline:
        return spawn(task);
    case Variant::async_replay:
        return async_replay(n, task);
    case Variant::async_replay_validate:
        return async_replay_validate(n, &is42, task);
    case Variant::async_replicate:
        return async_replicate(n, task);
    case Variant::async_replicate_validate:
        return async_replicate_validate(n, &is42, task);
    case Variant::async_replicate_vote:
        return async_replicate_vote(n, &vote42, task);
    case Variant::async_replicate_vote_validate:
        return async_replicate_vote_validate(n, &vote42, &is42, task);
    case Variant::dataflow_replay:
        return dataflow_replay(n, df_task, std::move(dep));
    case Variant::dataflow_replay_validate:
        return dataflow_replay_validate(n, &is42, df_task, std::move(dep));
    case Variant::dataflow_replicate:
        return dataflow_replicate(n, df_task, std::move(dep));
    case Variant::dataflow_replicate_validate:
        return dataflow_replicate_validate(n, &is42, df_task, std::move(dep));
    case Variant::dataflow_replicate_vote:
        return dataflow_replicate_vote(n, &vote42, df_task, std::move(dep));
    case Variant::dataflow_replicate_vote_validate:
        return dataflow_replicate_vote_validate(n, &vote42, &is42, df_task, std::move(dep));
    }
    throw std::logic_error("unknown variant");
}

}  // namespace

std::string to_string(Variant v) {
    for (const auto& [variant, name] : variant_names())
        if (variant == v)
            return name;
    return "unknown";
}

std::optional<Variant> variant_from_string(const std::string& name) {
    for (const auto& [variant, n] : variant_names())
        if (n == name)
            return variant;
    return std::nullopt;
}

const std::vector<Variant>& all_variants() {
    static const std::vector<Variant> variants = [] {
        std::vector<Variant> v;
        for (const auto& [variant, name] : variant_names())
            v.push_back(variant);
        return v;
    }();
    return variants;
}

BenchReport run_artificial_on(TaskPool& pool, const ArtificialConfig& cfg) {
    validate_config(cfg);
    RunTotals totals;

    for (unsigned rep = 0; rep < cfg.runs; ++rep) {
        auto counter = std::make_shared<FailureCounter>();
        auto executions = std::make_shared<std::atomic<std::uint64_t>>(0);
        WorkSpec spec{cfg.grain,
            FaultModel::with_probability(cfg.error_p, cfg.fault_kind, cfg.seed + rep)};
        auto task = [spec, counter, executions] {
            executions->fetch_add(1, std::memory_order_relaxed);
            return universal_task(spec, *counter);
        };

        std::uint64_t failed_handles = 0;
        auto reap = [&](TaskHandle<int>& h) {
            if (!h.has_value())
                ++failed_handles;
        };

        // Spawn in waves so at most 16 x cores handles are outstanding.
        const std::size_t cap = 16 * static_cast<std::size_t>(pool.worker_count());
        std::deque<TaskHandle<int>> inflight;

        auto t0 = std::chrono::steady_clock::now();
        for (std::uint64_t k = 0; k < cfg.task_count; ++k) {
            inflight.push_back(launch(cfg.variant, cfg.n, task));
            if (inflight.size() >= cap) {
                reap(inflight.front());
                inflight.pop_front();
            }
        }
        for (auto& h : inflight)
            reap(h);
        auto t1 = std::chrono::steady_clock::now();

        totals.walls.push_back(std::chrono::duration<double>(t1 - t0).count());
        totals.executions += executions->load();
        totals.failures += counter->count();
        totals.failed_handles += failed_handles;
    }

    BenchReport report;
    double mean = 0.0;
    for (double w : totals.walls)
        mean += w;
    mean /= static_cast<double>(totals.walls.size());
    double var = 0.0;
    for (double w : totals.walls)
        var += (w - mean) * (w - mean);
    var /= static_cast<double>(totals.walls.size());
    report.wall_seconds = mean;
    report.wall_stddev = std::sqrt(var);
    report.tasks_launched = cfg.task_count;
    report.executions = totals.executions / cfg.runs;
    report.injected_failures = totals.failures / cfg.runs;
    report.failed_handles = totals.failed_handles;
    report.runs_averaged = cfg.runs;
    return report;
}

BenchReport run_artificial(const ArtificialConfig& cfg) {
    validate_config(cfg);
    TaskPool pool({cfg.cores, QueuePolicy::work_stealing});
    return run_artificial_on(pool, cfg);
}

BenchReport with_overhead(BenchReport variant, const BenchReport& baseline,
    std::uint64_t task_count) {
    variant.amortized_overhead_us =
        (variant.wall_seconds - baseline.wall_seconds) / static_cast<double>(task_count) * 1e6;
    return variant;
}

std::vector<BenchReport> sweep(std::vector<ArtificialConfig> cfgs) {
    if (cfgs.empty())
        return {};
    for (const auto& cfg : cfgs) {
        if (cfg.task_count != cfgs.front().task_count || cfg.grain != cfgs.front().grain)
            throw std::invalid_argument("sweep: configs must share task_count and grain");
    }
    bool has_baseline = false;
    for (const auto& cfg : cfgs)
        has_baseline |= cfg.variant == Variant::baseline;
    if (!has_baseline) {
        ArtificialConfig base = cfgs.front();
        base.variant = Variant::baseline;
        base.error_p = 0.0;
        cfgs.insert(cfgs.begin(), base);
    }

    std::vector<BenchReport> reports;
    reports.reserve(cfgs.size());
    std::optional<BenchReport> baseline;
    for (const auto& cfg : cfgs) {
        BenchReport r = run_artificial(cfg);
        if (cfg.variant == Variant::baseline && !baseline)
            baseline = r;
        reports.push_back(r);
    }
    if (baseline) {
        for (auto& r : reports)
            r = with_overhead(r, *baseline, cfgs.front().task_count);
    }
    return reports;
}

}  // namespace resil
