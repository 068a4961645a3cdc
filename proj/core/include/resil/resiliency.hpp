// Copyright (c) 2026 The resil authors
//
// SPDX-License-Identifier: Apache-2.0
//
// Fault-tolerant task-launch combinators. Replay re-runs a failing task
// sequentially up to N attempts; replicate launches N concurrent instances
// and selects a result by first success, validation and/or voting. Each
// combinator exists in an async (eager arguments) and a dataflow
// (dependency-joining) flavor.

#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <type_traits>
#include <utility>
#include <vector>

#include "resil/error.hpp"
#include "resil/runtime.hpp"
#include "resil/task_handle.hpp"

namespace resil {
namespace detail {

inline void require_attempts(unsigned n) {
    if (n < 1)
        throw std::invalid_argument("resiliency: n must be >= 1");
}

struct AlwaysValid {
    template <typename V>
    bool operator()(const V&) const noexcept { return true; }
};

/// A validator that throws counts as validation-false for that attempt.
template <typename Val, typename V>
bool safe_validate(Val& valf, const V& value) {
    try {
        return static_cast<bool>(valf(value));
    } catch (...) {
        return false;
    }
}

/// Sequentially execute `attempt` up to n times, resolving the promise with
/// the first validated result. Exhaustion after a fault yields
/// replay_exhausted (carrying the last fault); exhaustion after an invalid
/// result yields validation_exhausted.
template <typename V, typename Attempt, typename Val>
void replay_into(const Promise<V>& promise, unsigned n, Attempt& attempt, Val& valf) {
    std::optional<ErrorPayload> last_fault;
    for (unsigned i = 0; i < n; ++i) {
        std::optional<V> result;
        try {
            result.emplace(attempt());
        } catch (...) {
            last_fault = current_exception_payload();
            continue;
        }
        if (safe_validate(valf, *result)) {
            promise.set_value(std::move(*result));
            return;
        }
        last_fault.reset();
    }
    if (last_fault) {
        promise.set_error(make_error(ErrorKind::replay_exhausted,
            "replay attempts exhausted", std::move(*last_fault)));
    } else {
        promise.set_error(make_error(ErrorKind::validation_exhausted,
            "no replay attempt produced a valid result"));
    }
}

template <typename V, typename Val, typename Run>
TaskHandle<V> launch_replay(unsigned n, Val valf, Run run) {
    Promise<V> promise;
    active_pool().submit([promise, n, valf = std::move(valf), run = std::move(run)]() mutable {
        replay_into(promise, n, run, valf);
    });
    return promise.handle();
}

/// Per-instance outcome slots for a replicate launch, indexed by launch
/// order. `last_fault` tracks the fault of the last-finishing failed
/// instance, which is what an all-failed launch reports as its cause.
template <typename V>
struct ReplicaSet {
    explicit ReplicaSet(unsigned n) : results(n), faults(n), remaining(n) {}

    std::vector<std::optional<V>> results;
    std::vector<std::optional<ErrorPayload>> faults;
    std::atomic<unsigned> remaining;
    std::mutex mtx;
    std::optional<ErrorPayload> last_fault;
};

/// Selection, run once every instance has finished (losing replicas are
/// never cancelled). With no voter: first success by launch index among the
/// validated results. With a voter: votef applied to the validated results
/// in launch-index order; a fault inside votef surfaces as task_fault.
template <typename V, typename Val, typename Vote>
void select_replica(const Promise<V>& promise, ReplicaSet<V>& set, Val& valf,
    Vote* votef) {
    std::vector<V> eligible;
    bool any_success = false;
    for (auto& result : set.results) {
        if (!result)
            continue;
        any_success = true;
        if (safe_validate(valf, *result))
            eligible.push_back(*result);
    }
    if (eligible.empty()) {
        if (!any_success) {
            promise.set_error(make_error(ErrorKind::all_replicas_failed,
                "all replica instances faulted", std::move(*set.last_fault)));
        } else {
            promise.set_error(make_error(ErrorKind::validation_exhausted,
                "no replica result passed validation"));
        }
        return;
    }
    if (!votef) {
        promise.set_value(std::move(eligible.front()));
        return;
    }
    run_into(promise, [&] { return (*votef)(std::move(eligible)); });
}

template <typename V, typename Val, typename Vote, typename Run>
TaskHandle<V> launch_replicate(unsigned n, Val valf, std::optional<Vote> votef, Run run) {
    Promise<V> promise;
    auto set = std::make_shared<ReplicaSet<V>>(n);
    auto shared_run = std::make_shared<Run>(std::move(run));
    auto shared_vote = votef
        ? std::make_shared<Vote>(std::move(*votef))
        : std::shared_ptr<Vote>{};
    TaskPool& pool = active_pool();
    for (unsigned i = 0; i < n; ++i) {
        pool.submit([promise, set, shared_run, shared_vote, valf, i, &pool]() mutable {
            try {
                set->results[i].emplace((*shared_run)());
            } catch (...) {
                ErrorPayload fault = current_exception_payload();
                set->faults[i] = fault;
                std::lock_guard lk(set->mtx);
                set->last_fault = std::move(fault);
            }
            if (set->remaining.fetch_sub(1, std::memory_order_acq_rel) == 1) {
                pool.submit([promise, set, shared_vote, valf]() mutable {
                    select_replica(promise, *set, valf, shared_vote.get());
                });
            }
        });
    }
    return promise.handle();
}

template <typename F, typename... Args>
auto make_runner(F f, Args... args) {
    return [f = std::move(f), tup = std::make_tuple(std::move(args)...)]() mutable {
        return std::apply(f, tup);
    };
}

}  // namespace detail

// ---- replay -------------------------------------------------------------

template <typename F, typename... Args>
auto async_replay(unsigned n, F f, Args... args)
    -> TaskHandle<std::invoke_result_t<F&, Args&...>> {
    using V = std::invoke_result_t<F&, Args&...>;
    detail::require_attempts(n);
    return detail::launch_replay<V>(n, detail::AlwaysValid{},
        detail::make_runner(std::move(f), std::move(args)...));
}

template <typename Val, typename F, typename... Args>
auto async_replay_validate(unsigned n, Val valf, F f, Args... args)
    -> TaskHandle<std::invoke_result_t<F&, Args&...>> {
    using V = std::invoke_result_t<F&, Args&...>;
    detail::require_attempts(n);
    return detail::launch_replay<V>(n, std::move(valf),
        detail::make_runner(std::move(f), std::move(args)...));
}

namespace detail {

template <typename V, typename Val, typename F, typename D>
TaskHandle<V> dataflow_replay_impl(unsigned n, Val valf, F f, std::vector<TaskHandle<D>> deps) {
    Promise<V> promise;
    TaskPool& pool = active_pool();
    join_then(
        std::move(deps),
        [promise, n, valf = std::move(valf), f = std::move(f), &pool](std::vector<D> values) mutable {
            // Replays reuse the same resolved dependency values; dependencies
            // are never re-executed.
            pool.submit([promise, n, valf = std::move(valf), f = std::move(f),
                            values = std::move(values)]() mutable {
                auto attempt = [&] { return f(values); };
                replay_into(promise, n, attempt, valf);
            });
        },
        [promise](const ErrorPayload& error) { promise.set_error(error); });
    return promise.handle();
}

}  // namespace detail

template <typename F, typename D>
auto dataflow_replay(unsigned n, F f, std::vector<TaskHandle<D>> deps)
    -> TaskHandle<std::invoke_result_t<F&, const std::vector<D>&>> {
    using V = std::invoke_result_t<F&, const std::vector<D>&>;
    detail::require_attempts(n);
    return detail::dataflow_replay_impl<V>(n, detail::AlwaysValid{}, std::move(f), std::move(deps));
}

template <typename Val, typename F, typename D>
auto dataflow_replay_validate(unsigned n, Val valf, F f, std::vector<TaskHandle<D>> deps)
    -> TaskHandle<std::invoke_result_t<F&, const std::vector<D>&>> {
    using V = std::invoke_result_t<F&, const std::vector<D>&>;
    detail::require_attempts(n);
    return detail::dataflow_replay_impl<V>(n, std::move(valf), std::move(f), std::move(deps));
}

// ---- replicate ----------------------------------------------------------

namespace detail {

template <typename V>
using NoVote = V (*)(std::vector<V>);

template <typename V, typename Val, typename Vote, typename F, typename D>
TaskHandle<V> dataflow_replicate_impl(unsigned n, Val valf, std::optional<Vote> votef, F f,
    std::vector<TaskHandle<D>> deps) {
    Promise<V> promise;
    join_then(
        std::move(deps),
        [promise, n, valf = std::move(valf), votef = std::move(votef),
            f = std::move(f)](std::vector<D> values) mutable {
            // All n instances share the same resolved dependency values.
            auto shared_values = std::make_shared<std::vector<D>>(std::move(values));
            auto run = [f = std::move(f), shared_values] { return f(*shared_values); };
            auto inner = launch_replicate<V>(n, std::move(valf), std::move(votef), std::move(run));
            inner.on_ready([promise, inner] {
                if (inner.has_value())
                    promise.set_value(inner.get());
                else
                    promise.set_error(inner.error());
            });
        },
        [promise](const ErrorPayload& error) { promise.set_error(error); });
    return promise.handle();
}

}  // namespace detail

template <typename F, typename... Args>
auto async_replicate(unsigned n, F f, Args... args)
    -> TaskHandle<std::invoke_result_t<F&, Args&...>> {
    using V = std::invoke_result_t<F&, Args&...>;
    detail::require_attempts(n);
    return detail::launch_replicate<V>(n, detail::AlwaysValid{},
        std::optional<detail::NoVote<V>>{},
        detail::make_runner(std::move(f), std::move(args)...));
}

template <typename Val, typename F, typename... Args>
auto async_replicate_validate(unsigned n, Val valf, F f, Args... args)
    -> TaskHandle<std::invoke_result_t<F&, Args&...>> {
    using V = std::invoke_result_t<F&, Args&...>;
    detail::require_attempts(n);
    return detail::launch_replicate<V>(n, std::move(valf),
        std::optional<detail::NoVote<V>>{},
        detail::make_runner(std::move(f), std::move(args)...));
}

template <typename Vote, typename F, typename... Args>
auto async_replicate_vote(unsigned n, Vote votef, F f, Args... args)
    -> TaskHandle<std::invoke_result_t<F&, Args&...>> {
    using V = std::invoke_result_t<F&, Args&...>;
    detail::require_attempts(n);
    return detail::launch_replicate<V>(n, detail::AlwaysValid{},
        std::optional<Vote>(std::move(votef)),
        detail::make_runner(std::move(f), std::move(args)...));
}

template <typename Vote, typename Val, typename F, typename... Args>
auto async_replicate_vote_validate(unsigned n, Vote votef, Val valf, F f, Args... args)
    -> TaskHandle<std::invoke_result_t<F&, Args&...>> {
    using V = std::invoke_result_t<F&, Args&...>;
    detail::require_attempts(n);
    return detail::launch_replicate<V>(n, std::move(valf),
        std::optional<Vote>(std::move(votef)),
        detail::make_runner(std::move(f), std::move(args)...));
}

template <typename F, typename D>
auto dataflow_replicate(unsigned n, F f, std::vector<TaskHandle<D>> deps)
    -> TaskHandle<std::invoke_result_t<F&, const std::vector<D>&>> {
    using V = std::invoke_result_t<F&, const std::vector<D>&>;
    detail::require_attempts(n);
    return detail::dataflow_replicate_impl<V>(n, detail::AlwaysValid{},
        std::optional<detail::NoVote<V>>{}, std::move(f), std::move(deps));
}

template <typename Val, typename F, typename D>
auto dataflow_replicate_validate(unsigned n, Val valf, F f, std::vector<TaskHandle<D>> deps)
    -> TaskHandle<std::invoke_result_t<F&, const std::vector<D>&>> {
    using V = std::invoke_result_t<F&, const std::vector<D>&>;
    detail::require_attempts(n);
    return detail::dataflow_replicate_impl<V>(n, std::move(valf),
        std::optional<detail::NoVote<V>>{}, std::move(f), std::move(deps));
}

template <typename Vote, typename F, typename D>
auto dataflow_replicate_vote(unsigned n, Vote votef, F f, std::vector<TaskHandle<D>> deps)
    -> TaskHandle<std::invoke_result_t<F&, const std::vector<D>&>> {
    using V = std::invoke_result_t<F&, const std::vector<D>&>;
    detail::require_attempts(n);
    return detail::dataflow_replicate_impl<V>(n, detail::AlwaysValid{},
        std::optional<Vote>(std::move(votef)), std::move(f), std::move(deps));
}

template <typename Vote, typename Val, typename F, typename D>
auto dataflow_replicate_vote_validate(unsigned n, Vote votef, Val valf, F f,
    std::vector<TaskHandle<D>> deps)
    -> TaskHandle<std::invoke_result_t<F&, const std::vector<D>&>> {
    using V = std::invoke_result_t<F&, const std::vector<D>&>;
    detail::require_attempts(n);
    return detail::dataflow_replicate_impl<V>(n, std::move(valf),
        std::optional<Vote>(std::move(votef)), std::move(f), std::move(deps));
}

/// Default voter: most frequent value wins, ties go to the value whose first
/// occurrence has the smallest launch index.
template <typename V>
V majority_vote(std::vector<V> results) {
    if (results.empty())
        throw std::invalid_argument("majority_vote: empty result set");
    std::size_t best = 0;
    std::size_t best_count = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        std::size_t count = 0;
        for (const auto& r : results)
            if (r == results[i])
                ++count;
        if (count > best_count) {
            best = i;
            best_count = count;
        }
    }
    return results[best];
}

}  // namespace resil
