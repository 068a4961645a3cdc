// Copyright (c) 2026 The resil authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cassert>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "resil/error.hpp"
#include "resil/pool.hpp"

namespace resil {

template <typename V>
class Promise;

/// Shareable read-only view of a deferred task result. Resolves exactly once,
/// to a value or an ErrorPayload; every reader observes the same outcome.
template <typename V>
class TaskHandle {
public:
    using value_type = V;

    TaskHandle() = default;

    static TaskHandle resolved(V value) {
        TaskHandle h{std::make_shared<State>()};
        h.st_->value.emplace(std::move(value));
        h.st_->ready.store(true, std::memory_order_release);
        return h;
    }

    static TaskHandle failed(ErrorPayload error) {
        TaskHandle h{std::make_shared<State>()};
        h.st_->error.emplace(std::move(error));
        h.st_->ready.store(true, std::memory_order_release);
        return h;
    }

    bool valid() const noexcept { return static_cast<bool>(st_); }

    bool is_ready() const noexcept {
        return st_ && st_->ready.load(std::memory_order_acquire);
    }

    /// Block until resolution. On a worker thread this helps execute pending
    /// pool jobs instead of parking, so a waiting worker cannot deadlock the
    /// pool.
    void wait() const {
        assert(st_);
        State& s = *st_;
        if (s.ready.load(std::memory_order_acquire))
            return;
        if (TaskPool::on_worker_thread()) {
            TaskPool* pool = TaskPool::current();
            while (!s.ready.load(std::memory_order_acquire)) {
                if (!pool->try_run_one()) {
                    std::unique_lock lk(s.mtx);
                    if (!s.ready.load(std::memory_order_acquire))
                        s.cv.wait_for(lk, std::chrono::microseconds(100));
                }
            }
        } else {
            std::unique_lock lk(s.mtx);
            s.cv.wait(lk, [&] { return s.ready.load(std::memory_order_acquire); });
        }
    }

    bool has_value() const {
        wait();
        return st_->value.has_value();
    }

    const V& value() const {
        wait();
        if (st_->error)
            throw TaskError(*st_->error);
        return *st_->value;
    }

    /// Copy-on-read access; the stored value stays retrievable.
    V get() const { return value(); }

    const ErrorPayload& error() const {
        wait();
        assert(st_->error);
        return *st_->error;
    }

    /// Invoke `fn` once the handle resolves; immediately if already resolved.
    /// `fn` runs on the resolving thread.
    void on_ready(std::function<void()> fn) const {
        assert(st_);
        {
            std::unique_lock lk(st_->mtx);
            if (!st_->ready.load(std::memory_order_acquire)) {
                st_->callbacks.push_back(std::move(fn));
                return;
            }
        }
        fn();
    }

private:
    friend class Promise<V>;

    struct State {
        std::mutex mtx;
        std::condition_variable cv;
        std::optional<V> value;
        std::optional<ErrorPayload> error;
        std::vector<std::function<void()>> callbacks;
        std::atomic<bool> ready{false};
    };

    explicit TaskHandle(std::shared_ptr<State> st) : st_(std::move(st)) {}

    std::shared_ptr<State> st_;
};

/// Write end paired with a TaskHandle. Copyable so it can travel in task
/// closures; only one set_value/set_error call is allowed.
template <typename V>
class Promise {
public:
    Promise() : st_(std::make_shared<typename TaskHandle<V>::State>()) {}

    TaskHandle<V> handle() const { return TaskHandle<V>{st_}; }

    void set_value(V value) const {
        settle([&](auto& s) { s.value.emplace(std::move(value)); });
    }

    void set_error(ErrorPayload error) const {
        settle([&](auto& s) { s.error.emplace(std::move(error)); });
    }

private:
    template <typename Store>
    void settle(Store&& store) const {
        std::vector<std::function<void()>> callbacks;
        {
            std::lock_guard lk(st_->mtx);
            assert(!st_->ready.load(std::memory_order_relaxed));
            store(*st_);
            st_->ready.store(true, std::memory_order_release);
            callbacks.swap(st_->callbacks);
        }
        st_->cv.notify_all();
        for (auto& cb : callbacks)
            cb();
    }

    std::shared_ptr<typename TaskHandle<V>::State> st_;
};

}  // namespace resil
