// Copyright (c) 2026 The resil authors
//
// SPDX-License-Identifier: Apache-2.0
//
// Artificial-workload microbenchmark: launch a large number of fixed-grain
// tasks through a resiliency combinator and measure wall time, execution
// counts and amortized per-task overhead against a plain-spawn baseline.

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "resil/bench_report.hpp"
#include "resil/fault.hpp"
#include "resil/pool.hpp"

namespace resil {

enum class Variant {
    baseline,
    async_replay,
    async_replay_validate,
    async_replicate,
    async_replicate_validate,
    async_replicate_vote,
    async_replicate_vote_validate,
    dataflow_replay,
    dataflow_replay_validate,
    dataflow_replicate,
    dataflow_replicate_validate,
    dataflow_replicate_vote,
    dataflow_replicate_vote_validate,
};

std::string to_string(Variant v);
std::optional<Variant> variant_from_string(const std::string& name);
const std::vector<Variant>& all_variants();

struct ArtificialConfig {
    std::uint64_t task_count = 100'000;  // desk-scale default; the full-size
                                         // campaign uses 1,000,000
    std::chrono::nanoseconds grain = std::chrono::microseconds(200);
    double error_p = 0.0;
    FaultKind fault_kind = FaultKind::loud;
    unsigned n = 3;  // replay attempts / replicate instances
    unsigned cores = default_worker_count();
    Variant variant = Variant::baseline;
    std::uint64_t seed = 0;
    unsigned runs = 10;
};

/// Run the benchmark on an already-started pool; timing excludes pool
/// start-up and shutdown. Validate variants check result == 42, vote
/// variants use majority_vote. Failed final handles are counted in the
/// report, never hidden.
BenchReport run_artificial_on(TaskPool& pool, const ArtificialConfig& cfg);

/// Convenience wrapper that owns the pool for the duration of the run.
BenchReport run_artificial(const ArtificialConfig& cfg);

/// Fill in amortized_overhead_us of `variant` against `baseline`.
BenchReport with_overhead(BenchReport variant, const BenchReport& baseline,
    std::uint64_t task_count);

/// Run an ordered list of configs sharing task_count and grain. A baseline
/// config is prepended when none is present, and every report's overhead
/// column is computed against it.
std::vector<BenchReport> sweep(std::vector<ArtificialConfig> cfgs);

}  // namespace resil
