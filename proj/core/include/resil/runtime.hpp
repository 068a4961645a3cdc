// Copyright (c) 2026 The resil authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <tuple>
#include <type_traits>
#include <utility>
#include <vector>

#include "resil/error.hpp"
#include "resil/pool.hpp"
#include "resil/task_handle.hpp"

namespace resil {
namespace detail {

/// Translate the in-flight exception into an ErrorPayload. A rethrown
/// TaskError keeps its payload, anything else becomes a task_fault.
inline ErrorPayload current_exception_payload() {
    try {
        throw;
    } catch (const TaskError& e) {
        return e.payload();
    } catch (const std::exception& e) {
        return make_error(ErrorKind::task_fault, e.what());
    } catch (...) {
        return make_error(ErrorKind::task_fault, "unknown error");
    }
}

template <typename V, typename Op>
void run_into(const Promise<V>& promise, Op&& op) {
    try {
        promise.set_value(op());
    } catch (...) {
        promise.set_error(current_exception_payload());
    }
}

/// Wait for all deps, then call on_values with their results in dependency
/// order, or on_failure with the first (by index) failed dep's payload.
/// The chosen continuation runs on the thread resolving the last dep.
template <typename D, typename OnValues, typename OnFailure>
void join_then(std::vector<TaskHandle<D>> deps, OnValues on_values, OnFailure on_failure) {
    struct Join {
        std::vector<TaskHandle<D>> deps;
        OnValues on_values;
        OnFailure on_failure;
        std::atomic<std::size_t> remaining;

        Join(std::vector<TaskHandle<D>> d, OnValues ov, OnFailure of)
            : deps(std::move(d))
            , on_values(std::move(ov))
            , on_failure(std::move(of))
            , remaining(deps.size()) {}

        void finish() {
            for (const auto& dep : deps) {
                if (!dep.has_value()) {
                    on_failure(dep.error());
                    return;
                }
            }
            std::vector<D> values;
            values.reserve(deps.size());
            for (const auto& dep : deps)
                values.push_back(dep.get());
            on_values(std::move(values));
        }
    };

    if (deps.empty()) {
        on_values(std::vector<D>{});
        return;
    }
    auto join = std::make_shared<Join>(std::move(deps), std::move(on_values),
        std::move(on_failure));
    for (const auto& dep : join->deps) {
        dep.on_ready([join] {
            if (join->remaining.fetch_sub(1, std::memory_order_acq_rel) == 1)
                join->finish();
        });
    }
}

}  // namespace detail

/// Schedule `f(args...)` on the active pool. Faults surface only through the
/// returned handle.
template <typename F, typename... Args>
auto spawn(F f, Args... args) -> TaskHandle<std::invoke_result_t<F&, Args&...>> {
    using V = std::invoke_result_t<F&, Args&...>;
    Promise<V> promise;
    active_pool().submit(
        [promise, f = std::move(f), tup = std::make_tuple(std::move(args)...)]() mutable {
            detail::run_into(promise, [&] { return std::apply(f, tup); });
        });
    return promise.handle();
}

/// Run `f` with the resolved values of `deps` once all of them are ready.
/// If any dep failed, the first failure (by dependency index) propagates and
/// `f` never executes.
template <typename F, typename D>
auto dataflow(F f, std::vector<TaskHandle<D>> deps)
    -> TaskHandle<std::invoke_result_t<F&, const std::vector<D>&>> {
    using V = std::invoke_result_t<F&, const std::vector<D>&>;
    Promise<V> promise;
    TaskPool& pool = active_pool();
    detail::join_then(
        std::move(deps),
        [promise, f = std::move(f), &pool](std::vector<D> values) mutable {
            pool.submit([promise, f = std::move(f), values = std::move(values)]() mutable {
                detail::run_into(promise, [&] { return f(values); });
            });
        },
        [promise](const ErrorPayload& error) { promise.set_error(error); });
    return promise.handle();
}

}  // namespace resil
