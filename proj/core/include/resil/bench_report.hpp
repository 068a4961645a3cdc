// Copyright (c) 2026 The resil authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>

namespace resil {

/// Per-run measurements shared by both benchmarks. Executions and failure
/// counts are per-run means over `runs_averaged` repetitions; wall time
/// excludes pool start-up and shutdown.
struct BenchReport {
    double wall_seconds = 0.0;
    double wall_stddev = 0.0;
    std::uint64_t tasks_launched = 0;
    std::uint64_t executions = 0;
    std::uint64_t injected_failures = 0;
    std::uint64_t failed_handles = 0;    // final handles that resolved to an error
    std::uint64_t rejected_results = 0;  // validator rejections (stencil checksum path)
    /// (variant wall time - baseline wall time) / task count, microseconds.
    /// NaN until a baseline has been measured.
    double amortized_overhead_us = std::numeric_limits<double>::quiet_NaN();
    unsigned runs_averaged = 1;
};

}  // namespace resil
