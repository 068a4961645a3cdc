// Copyright (c) 2026 The resil authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <limits>
#include <memory>

namespace resil {

enum class QueuePolicy {
    work_stealing,  // per-worker deques, LIFO locally, steal FIFO
    fifo,           // one global FIFO queue
};

unsigned default_worker_count() noexcept;

struct RuntimeConfig {
    unsigned worker_count = default_worker_count();
    QueuePolicy queue_policy = QueuePolicy::work_stealing;
};

/// A pool of worker threads executing submitted jobs. At most one pool is
/// active per process; constructing it makes it the target of spawn() and
/// friends, destruction drains all outstanding jobs first.
class TaskPool {
public:
    explicit TaskPool(const RuntimeConfig& cfg = {});
    ~TaskPool();

    TaskPool(const TaskPool&) = delete;
    TaskPool& operator=(const TaskPool&) = delete;

    void submit(std::function<void()> job);

    /// Run one pending job on the calling thread, if any. Used by handle
    /// waits on worker threads so a blocked worker keeps the pool moving.
    bool try_run_one();

    /// Block until no submitted job is pending or running.
    void drain();

    unsigned worker_count() const noexcept;

    /// The pool the calling worker thread belongs to, else the process-wide
    /// active pool, else nullptr.
    static TaskPool* current() noexcept;
    static bool on_worker_thread() noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Like TaskPool::current() but throws std::logic_error when no pool exists.
TaskPool& active_pool();

/// Start a pool, run `body`, drain every outstanding task, stop the workers.
/// Configuration errors surface before `body` runs.
void run_pool(const RuntimeConfig& cfg, const std::function<void()>& body);

namespace detail {

inline constexpr unsigned no_worker_index = std::numeric_limits<unsigned>::max();

/// Index of the calling worker within its pool; no_worker_index elsewhere.
unsigned worker_index() noexcept;

}  // namespace detail
}  // namespace resil
