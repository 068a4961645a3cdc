// Copyright (c) 2026 The resil authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace resil {

/// Failure classification carried by a failed task handle.
enum class ErrorKind {
    task_fault,            // the task itself threw
    validation_exhausted,  // results were computed but none validated
    replay_exhausted,      // all replay attempts faulted
    all_replicas_failed,   // every replica instance faulted
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::task_fault: return "task_fault";
    case ErrorKind::validation_exhausted: return "validation_exhausted";
    case ErrorKind::replay_exhausted: return "replay_exhausted";
    case ErrorKind::all_replicas_failed: return "all_replicas_failed";
    }
    return "unknown";
}

/// The failure value stored in a handle. `cause` chains are finite by
/// construction (each link is built from an already-complete payload).
struct ErrorPayload {
    ErrorKind kind = ErrorKind::task_fault;
    std::string message;
    std::shared_ptr<const ErrorPayload> cause;
};

inline ErrorPayload make_error(ErrorKind kind, std::string message) {
    return ErrorPayload{kind, std::move(message), nullptr};
}

inline ErrorPayload make_error(ErrorKind kind, std::string message, ErrorPayload cause) {
    return ErrorPayload{kind, std::move(message),
        std::make_shared<const ErrorPayload>(std::move(cause))};
}

/// Thrown when reading the value of a failed handle.
class TaskError : public std::runtime_error {
public:
    explicit TaskError(ErrorPayload payload)
        : std::runtime_error(std::string(to_string(payload.kind)) + ": " + payload.message)
        , payload_(std::move(payload)) {}

    const ErrorPayload& payload() const noexcept { return payload_; }

private:
    ErrorPayload payload_;
};

}  // namespace resil
