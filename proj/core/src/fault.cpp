// Copyright (c) 2026 The resil authors
//
// SPDX-License-Identifier: Apache-2.0

#include "resil/fault.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "resil/pool.hpp"

namespace resil {
namespace {

std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace

FaultModel FaultModel::with_rate_factor(double x, FaultKind kind, std::uint64_t seed) {
    if (!(x >= 0.0))
        throw std::invalid_argument("FaultModel: rate factor must be >= 0");
    FaultModel m;
    m.rate_factor_ = x;
    m.probability_ = std::exp(-x);
    m.kind_ = kind;
    m.seed_ = seed;
    return m;
}

FaultModel FaultModel::with_probability(double p, FaultKind kind, std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("FaultModel: probability must be in [0, 1]");
    FaultModel m;
    m.rate_factor_ = p > 0.0 ? -std::log(p) : std::numeric_limits<double>::infinity();
    m.probability_ = p;
    m.kind_ = kind;
    m.seed_ = seed;
    return m;
}

FaultModel FaultModel::scripted(std::vector<ScriptedOutcome> outcomes) {
    FaultModel m;
    m.script_ = std::make_shared<Script>();
    m.script_->outcomes = std::move(outcomes);
    return m;
}

ScriptedOutcome FaultModel::next_scripted() const {
    assert(script_);
    std::size_t i = script_->next.fetch_add(1, std::memory_order_relaxed);
    if (i >= script_->outcomes.size())
        return ScriptedOutcome::succeed;
    return script_->outcomes[i];
}

bool should_fail(const FaultModel& model, std::mt19937_64& rng) {
    assert(!model.is_scripted());
    double x = model.rate_factor();
    if (x == 0.0)
        return true;  // p = e^0 = 1
    if (std::isinf(x))
        return false;  // p = 0
    std::exponential_distribution<double> dist(x);
    return dist(rng) > 1.0;
}

std::mt19937_64& thread_rng(std::uint64_t seed) {
    thread_local std::mt19937_64 engine;
    thread_local std::uint64_t engine_seed = 0;
    thread_local bool seeded = false;
    if (!seeded || engine_seed != seed) {
        engine.seed(splitmix64(seed) ^ splitmix64(detail::worker_index() + 0x51ed2701ull));
        engine_seed = seed;
        seeded = true;
    }
    return engine;
}

double corrupt_value(double v) noexcept {
    double c = 1.0 - v;
    if (c == v)
        c = v + 1.0;
    return c;
}

bool is_injected_fault(const ErrorPayload& payload) noexcept {
    const ErrorPayload* p = &payload;
    while (p) {
        if (std::string_view(p->message).substr(0, injected_fault_prefix.size()) ==
            injected_fault_prefix)
            return true;
        p = p->cause.get();
    }
    return false;
}

int universal_task(const WorkSpec& spec, FailureCounter& counter) {
    bool loud = false;
    bool silent = false;
    const FaultModel& model = spec.fault_model;
    if (model.is_scripted()) {
        switch (model.next_scripted()) {
        case ScriptedOutcome::loud_fault: loud = true; break;
        case ScriptedOutcome::silent_corrupt: silent = true; break;
        case ScriptedOutcome::succeed: break;
        }
    } else if (should_fail(model, thread_rng(model.seed()))) {
        if (model.kind() == FaultKind::loud)
            loud = true;
        else
            silent = true;
    }
    if (loud || silent)
        counter.record();

    // Failure was decided before the busy-wait: a failing task still burns
    // its full grain size.
    auto start = std::chrono::steady_clock::now();
    while (std::chrono::steady_clock::now() - start < spec.delay) {
    }

    if (loud)
        throw InjectedFault("task fault");
    if (silent)
        return static_cast<int>(corrupt_value(42.0));
    return 42;
}

}  // namespace resil
