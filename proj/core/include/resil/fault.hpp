// Copyright (c) 2026 The resil authors
//
// SPDX-License-Identifier: Apache-2.0
//
// Controlled failure generation: an exponential error law for stochastic
// runs (fail with probability e^{-x} for rate factor x), deterministic
// scripts for unit tests, and silent value corruption for validation and
// voting paths.

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "resil/error.hpp"

namespace resil {

enum class FaultKind {
    loud,    // the task throws
    silent,  // the task completes with a corrupted value
};

enum class ScriptedOutcome { succeed, loud_fault, silent_corrupt };

/// Parameters of the injected error process. Probabilistic mode fails each
/// execution independently with probability p = e^{-x}; scripted mode
/// consumes a fixed outcome list in execution order (the cursor is shared
/// across copies of the model).
class FaultModel {
public:
    FaultModel() = default;

    static FaultModel none() { return with_probability(0.0, FaultKind::loud, 0); }

    static FaultModel with_rate_factor(double x, FaultKind kind, std::uint64_t seed);

    /// Convenience parameterization by failure probability; x = -ln p.
    static FaultModel with_probability(double p, FaultKind kind, std::uint64_t seed);

    static FaultModel scripted(std::vector<ScriptedOutcome> outcomes);

    bool is_scripted() const noexcept { return script_ != nullptr; }
    double rate_factor() const noexcept { return rate_factor_; }
    double probability() const noexcept { return probability_; }
    FaultKind kind() const noexcept { return kind_; }
    std::uint64_t seed() const noexcept { return seed_; }

    /// Next scripted outcome; succeeds once the script is exhausted.
    ScriptedOutcome next_scripted() const;

private:
    struct Script {
        std::vector<ScriptedOutcome> outcomes;
        std::atomic<std::size_t> next{0};
    };

    double rate_factor_ = std::numeric_limits<double>::infinity();
    double probability_ = 0.0;
    FaultKind kind_ = FaultKind::loud;
    std::uint64_t seed_ = 0;
    std::shared_ptr<Script> script_;
};

/// Counts injected failures; one seq_cst increment per injection.
class FailureCounter {
public:
    void record() noexcept { count_.fetch_add(1, std::memory_order_seq_cst); }
    std::uint64_t count() const noexcept { return count_.load(std::memory_order_seq_cst); }
    void reset() noexcept { count_.store(0, std::memory_order_seq_cst); }

private:
    std::atomic<std::uint64_t> count_{0};
};

/// Decide failure for one execution of a probabilistic model: draw an
/// exponential variate with rate x and fail iff it exceeds 1.0, i.e. with
/// probability e^{-x}.
bool should_fail(const FaultModel& model, std::mt19937_64& rng);

/// Per-thread RNG stream derived from (seed, worker index), so concurrent
/// probabilistic runs need no shared lock.
std::mt19937_64& thread_rng(std::uint64_t seed);

/// Deterministic silent-error payload: 1 - v (flip sign, add 1), nudged by
/// +1 at the fixed point v = 0.5 so the result always differs from v.
double corrupt_value(double v) noexcept;

/// Marker for injected loud faults so they are distinguishable from
/// organic task faults.
inline constexpr std::string_view injected_fault_prefix = "[injected] ";

class InjectedFault : public std::runtime_error {
public:
    explicit InjectedFault(const std::string& what)
        : std::runtime_error(std::string(injected_fault_prefix) + what) {}
};

bool is_injected_fault(const ErrorPayload& payload) noexcept;

/// One task's worth of artificial work: grain size enforced by busy-wait
/// plus the fault process to apply.
struct WorkSpec {
    std::chrono::nanoseconds delay{0};
    FaultModel fault_model;
};

/// The artificial benchmark task. Decides failure up front, busy-waits the
/// full grain size either way, then returns 42, throws an InjectedFault
/// (loud), or returns a corrupted value != 42 (silent).
int universal_task(const WorkSpec& spec, FailureCounter& counter);

}  // namespace resil
