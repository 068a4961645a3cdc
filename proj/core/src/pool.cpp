// Copyright (c) 2026 The resil authors
//
// SPDX-License-Identifier: Apache-2.0

#include "resil/pool.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

namespace resil {
namespace {

std::atomic<TaskPool*> g_active_pool{nullptr};

thread_local TaskPool* tl_worker_pool = nullptr;
thread_local unsigned tl_worker_index = detail::no_worker_index;

}  // namespace

unsigned default_worker_count() noexcept {
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

unsigned detail::worker_index() noexcept { return tl_worker_index; }

struct TaskPool::Impl {
    RuntimeConfig cfg;

    std::mutex mtx;
    std::condition_variable work_cv;
    std::condition_variable idle_cv;
    std::deque<std::function<void()>> global_queue;
    std::vector<std::deque<std::function<void()>>> local_queues;
    std::size_t pending = 0;  // queued + running
    bool stopping = false;
    std::vector<std::thread> workers;

    // Callers must hold mtx.
    bool take_locked(unsigned idx, std::function<void()>& out) {
        if (cfg.queue_policy == QueuePolicy::work_stealing && idx != detail::no_worker_index) {
            auto& own = local_queues[idx];
            if (!own.empty()) {
                out = std::move(own.back());
                own.pop_back();
                return true;
            }
        }
        if (!global_queue.empty()) {
            out = std::move(global_queue.front());
            global_queue.pop_front();
            return true;
        }
        if (cfg.queue_policy == QueuePolicy::work_stealing) {
            for (std::size_t k = 0; k < local_queues.size(); ++k) {
                std::size_t victim = (idx == detail::no_worker_index ? k : (idx + 1 + k) % local_queues.size());
                auto& q = local_queues[victim];
                if (!q.empty()) {
                    out = std::move(q.front());
                    q.pop_front();
                    return true;
                }
            }
        }
        return false;
    }

    void finish_one() {
        std::lock_guard lk(mtx);
        if (--pending == 0)
            idle_cv.notify_all();
    }

    void worker_loop(TaskPool* pool, unsigned idx) {
        tl_worker_pool = pool;
        tl_worker_index = idx;
        for (;;) {
            std::function<void()> job;
            {
                std::unique_lock lk(mtx);
                work_cv.wait(lk, [&] { return take_locked(idx, job) || stopping; });
                if (!job)
                    return;
            }
            job();
            finish_one();
        }
    }
};

TaskPool::TaskPool(const RuntimeConfig& cfg) : impl_(std::make_unique<Impl>()) {
    RuntimeConfig resolved = cfg;
    if (resolved.worker_count == 0)
        throw std::invalid_argument("TaskPool: worker_count must be >= 1");
    TaskPool* expected = nullptr;
    if (!g_active_pool.compare_exchange_strong(expected, this))
        throw std::logic_error("TaskPool: a pool is already active in this process");
    impl_->cfg = resolved;
    impl_->local_queues.resize(resolved.worker_count);
    impl_->workers.reserve(resolved.worker_count);
    for (unsigned i = 0; i < resolved.worker_count; ++i)
        impl_->workers.emplace_back([this, i] { impl_->worker_loop(this, i); });
}

TaskPool::~TaskPool() {
    drain();
    {
        std::lock_guard lk(impl_->mtx);
        impl_->stopping = true;
    }
    impl_->work_cv.notify_all();
    for (auto& t : impl_->workers)
        t.join();
    g_active_pool.store(nullptr);
}

void TaskPool::submit(std::function<void()> job) {
    {
        std::lock_guard lk(impl_->mtx);
        ++impl_->pending;
        if (impl_->cfg.queue_policy == QueuePolicy::work_stealing &&
            tl_worker_pool == this && tl_worker_index != detail::no_worker_index) {
            impl_->local_queues[tl_worker_index].push_back(std::move(job));
        } else {
            impl_->global_queue.push_back(std::move(job));
        }
    }
    impl_->work_cv.notify_one();
}

bool TaskPool::try_run_one() {
    std::function<void()> job;
    {
        std::lock_guard lk(impl_->mtx);
        unsigned idx = (tl_worker_pool == this) ? tl_worker_index : detail::no_worker_index;
        if (!impl_->take_locked(idx, job))
            return false;
    }
    job();
    impl_->finish_one();
    return true;
}

void TaskPool::drain() {
    std::unique_lock lk(impl_->mtx);
    impl_->idle_cv.wait(lk, [&] { return impl_->pending == 0; });
}

unsigned TaskPool::worker_count() const noexcept { return impl_->cfg.worker_count; }

TaskPool* TaskPool::current() noexcept {
    if (tl_worker_pool)
        return tl_worker_pool;
    return g_active_pool.load();
}

bool TaskPool::on_worker_thread() noexcept { return tl_worker_pool != nullptr; }

TaskPool& active_pool() {
    TaskPool* pool = TaskPool::current();
    if (!pool)
        throw std::logic_error("resil: no active TaskPool");
    return *pool;
}

void run_pool(const RuntimeConfig& cfg, const std::function<void()>& body) {
    TaskPool pool(cfg);
    body();
    pool.drain();
}

}  // namespace resil
