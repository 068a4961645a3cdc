// Copyright (c) 2026 The resil authors
//
// SPDX-License-Identifier: Apache-2.0

#include "resil/stencil.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <deque>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "resil/resiliency.hpp"
#include "resil/runtime.hpp"

namespace resil {
namespace {

double sum_of(std::span<const double> v) noexcept {
    double s = 0.0;
    for (double x : v)
        s += x;
    return s;
}

void validate_config(const StencilConfig& cfg) {
    if (cfg.subdomains < 1 || cfg.points < 1 || cfg.iterations < 1 || cfg.steps_per_iteration < 1)
        throw std::invalid_argument("stencil: all size parameters must be >= 1");
    if (cfg.points <= 2 * cfg.steps_per_iteration)
        throw std::invalid_argument("stencil: points per subdomain must exceed 2 * steps");
    if (!(cfg.courant > 0.0 && cfg.courant <= 1.0))
        throw std::invalid_argument("stencil: courant number must be in (0, 1]");
    if (!(cfg.error_p >= 0.0 && cfg.error_p < 1.0))
        throw std::invalid_argument("stencil: error_p must be in [0, 1)");
    if (cfg.n < 1)
        throw std::invalid_argument("stencil: n must be >= 1");
}

}  // namespace

std::string to_string(StencilVariant v) {
    switch (v) {
    case StencilVariant::pure_dataflow: return "pure_dataflow";
    case StencilVariant::replay: return "replay";
    case StencilVariant::replay_checksum: return "replay_checksum";
    case StencilVariant::replicate: return "replicate";
    }
    return "unknown";
}

StencilConfig stencil_case_a() {
    StencilConfig cfg;
    cfg.subdomains = 128;
    cfg.points = 16000;
    cfg.iterations = 8192;
    cfg.steps_per_iteration = 128;
    return cfg;
}

StencilConfig stencil_case_b() {
    StencilConfig cfg;
    cfg.subdomains = 256;
    cfg.points = 8000;
    cfg.iterations = 8192;
    cfg.steps_per_iteration = 128;
    return cfg;
}

StencilConfig stencil_case_desk() { return StencilConfig{}; }

double lw_flux(double u0, double u1, double nu) noexcept {
    return 0.5 * nu * (u0 + u1) - 0.5 * nu * nu * (u1 - u0);
}

std::vector<double> lw_step(std::span<const double> extended, double nu) {
    // Coefficient form of u'_j = u_j - (F_{j+1/2} - F_{j-1/2}). At nu = 1 the
    // coefficients degenerate to (1, 0, 0), making the step a bitwise-exact
    // unit shift.
    const double a = 0.5 * nu * (1.0 + nu);
    const double b = 1.0 - nu * nu;
    const double c = -0.5 * nu * (1.0 - nu);
    std::vector<double> out(extended.size() - 2);
    for (std::size_t j = 1; j + 1 < extended.size(); ++j)
        out[j - 1] = a * extended[j - 1] + b * extended[j] + c * extended[j + 1];
    return out;
}

SubdomainState advance_subdomain(std::span<const double> left, std::span<const double> mid,
    std::span<const double> right, unsigned steps, double nu) {
    const std::size_t ghost = steps;
    const std::size_t points = mid.size();
    if (left.size() < ghost || right.size() < ghost)
        throw std::invalid_argument("advance_subdomain: neighbor smaller than ghost width");
    if (points <= 2 * ghost)
        throw std::invalid_argument("advance_subdomain: subdomain smaller than 2 * ghost width");

    std::vector<double> cur;
    cur.reserve(points + 2 * ghost);
    cur.insert(cur.end(), left.end() - static_cast<std::ptrdiff_t>(ghost), left.end());
    cur.insert(cur.end(), mid.begin(), mid.end());
    cur.insert(cur.end(), right.begin(), right.begin() + static_cast<std::ptrdiff_t>(ghost));

    SubdomainState out;
    out.witness.input_sum = sum_of(mid);

    // `off` tracks where the subdomain's first cell sits inside `cur`; each
    // step shrinks the extended array by one cell per side.
    std::size_t off = ghost;
    for (unsigned s = 0; s < steps; ++s) {
        out.witness.left_flux_sum += lw_flux(cur[off - 1], cur[off], nu);
        out.witness.right_flux_sum += lw_flux(cur[off + points - 1], cur[off + points], nu);
        cur = lw_step(cur, nu);
        --off;
    }
    out.witness.output_sum = sum_of(cur);
    out.values = std::move(cur);
    return out;
}

SubdomainState subdomain_task(const SubdomainState& left, const SubdomainState& mid,
    const SubdomainState& right, unsigned steps, double nu, const FaultModel& fault,
    FailureCounter& counter) {
    bool loud = false;
    bool silent = false;
    if (fault.is_scripted()) {
        switch (fault.next_scripted()) {
        case ScriptedOutcome::loud_fault: loud = true; break;
        case ScriptedOutcome::silent_corrupt: silent = true; break;
        case ScriptedOutcome::succeed: break;
        }
    } else if (fault.probability() > 0.0 && should_fail(fault, thread_rng(fault.seed()))) {
        if (fault.kind() == FaultKind::loud)
            loud = true;
        else
            silent = true;
    }

    SubdomainState out = advance_subdomain(left.values, mid.values, right.values, steps, nu);

    if (loud) {
        counter.record();
        throw InjectedFault("stencil task fault");
    }
    if (silent) {
        counter.record();
        std::size_t cell = fault.is_scripted()
            ? out.values.size() / 2
            : thread_rng(fault.seed())() % out.values.size();
        out.values[cell] = corrupt_value(out.values[cell]);
        out.witness.output_sum = sum_of(out.values);
    }
    return out;
}

bool validate_checksum(const SubdomainState& state) {
    const ChecksumWitness& w = state.witness;
    double expected = w.input_sum - (w.right_flux_sum - w.left_flux_sum);
    double tol = 1e-9 * std::max(1.0, std::abs(w.input_sum));
    return std::abs(w.output_sum - expected) <= tol;
}

std::vector<double> initial_field(unsigned subdomains, unsigned points) {
    const std::size_t total = static_cast<std::size_t>(subdomains) * points;
    std::vector<double> field(total);
    for (std::size_t j = 0; j < total; ++j)
        field[j] = std::sin(2.0 * std::numbers::pi * static_cast<double>(j) /
                            static_cast<double>(total));
    return field;
}

StencilResult run_stencil(const StencilConfig& cfg) {
    validate_config(cfg);
    const unsigned S = cfg.subdomains;
    const unsigned D = cfg.points;
    const unsigned G = cfg.steps_per_iteration;
    const double nu = cfg.courant;

    TaskPool pool({cfg.cores, QueuePolicy::work_stealing});

    FaultModel fault = FaultModel::with_probability(cfg.error_p, cfg.fault_kind, cfg.seed);
    auto counter = std::make_shared<FailureCounter>();
    auto executions = std::make_shared<std::atomic<std::uint64_t>>(0);
    auto rejections = std::make_shared<std::atomic<std::uint64_t>>(0);

    auto task = [=](const std::vector<SubdomainState>& deps) {
        executions->fetch_add(1, std::memory_order_relaxed);
        return subdomain_task(deps[0], deps[1], deps[2], G, nu, fault, *counter);
    };
    auto validator = [rejections](const SubdomainState& s) {
        bool ok = validate_checksum(s);
        if (!ok)
            rejections->fetch_add(1, std::memory_order_relaxed);
        return ok;
    };

    std::vector<double> field = initial_field(S, D);
    std::vector<TaskHandle<SubdomainState>> row(S);
    for (unsigned i = 0; i < S; ++i) {
        SubdomainState init;
        init.values.assign(field.begin() + static_cast<std::ptrdiff_t>(i) * D,
            field.begin() + (static_cast<std::ptrdiff_t>(i) + 1) * D);
        double s = sum_of(init.values);
        init.witness = ChecksumWitness{s, 0.0, 0.0, s};
        row[i] = TaskHandle<SubdomainState>::resolved(std::move(init));
    }

    auto t0 = std::chrono::steady_clock::now();

    // Rolling window: wiring runs ahead of execution, but old rows are waited
    // on so the number of live join states stays bounded.
    std::deque<std::vector<TaskHandle<SubdomainState>>> window;
    for (unsigned k = 0; k < cfg.iterations; ++k) {
        std::vector<TaskHandle<SubdomainState>> next(S);
        for (unsigned i = 0; i < S; ++i) {
            std::vector<TaskHandle<SubdomainState>> deps{
                row[(i + S - 1) % S], row[i], row[(i + 1) % S]};
            switch (cfg.variant) {
            case StencilVariant::pure_dataflow:
                next[i] = dataflow(task, std::move(deps));
                break;
            case StencilVariant::replay:
                next[i] = dataflow_replay(cfg.n, task, std::move(deps));
                break;
            case StencilVariant::replay_checksum:
                next[i] = dataflow_replay_validate(cfg.n, validator, task, std::move(deps));
                break;
            case StencilVariant::replicate:
                next[i] = dataflow_replicate(cfg.n, task, std::move(deps));
                break;
            }
        }
        window.push_back(next);
        if (window.size() > 8) {
            for (auto& h : window.front())
                h.wait();
            window.pop_front();
        }
        row = std::move(next);
    }
    for (auto& h : row)
        h.wait();

    auto t1 = std::chrono::steady_clock::now();

    for (const auto& h : row) {
        if (!h.has_value())
            throw TaskError(h.error());
    }

    StencilResult result;
    result.field.reserve(static_cast<std::size_t>(S) * D);
    for (const auto& h : row) {
        const auto& v = h.value().values;
        result.field.insert(result.field.end(), v.begin(), v.end());
    }
    result.report.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    result.report.tasks_launched = static_cast<std::uint64_t>(S) * cfg.iterations;
    result.report.executions = executions->load();
    result.report.injected_failures = counter->count();
    result.report.rejected_results = rejections->load();
    result.report.runs_averaged = 1;
    return result;
}

void write_field(const std::string& path, unsigned subdomains, unsigned points,
    std::span<const double> field) {
    // Header and payload are little-endian; this code assumes a LE host.
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("write_field: cannot open " + tmp);
        const char magic[4] = {'R', 'S', 'T', '1'};
        std::uint32_t s = subdomains, d = points, reserved = 0;
        out.write(magic, 4);
        out.write(reinterpret_cast<const char*>(&s), 4);
        out.write(reinterpret_cast<const char*>(&d), 4);
        out.write(reinterpret_cast<const char*>(&reserved), 4);
        out.write(reinterpret_cast<const char*>(field.data()),
            static_cast<std::streamsize>(field.size() * sizeof(double)));
        if (!out)
            throw std::runtime_error("write_field: write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

FieldFile read_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("read_field: cannot open " + path);
    char magic[4];
    std::uint32_t s = 0, d = 0, reserved = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&s), 4);
    in.read(reinterpret_cast<char*>(&d), 4);
    in.read(reinterpret_cast<char*>(&reserved), 4);
    if (!in || std::memcmp(magic, "RST1", 4) != 0)
        throw std::runtime_error("read_field: bad header in " + path);
    FieldFile f;
    f.subdomains = s;
    f.points = d;
    f.field.resize(static_cast<std::size_t>(s) * d);
    in.read(reinterpret_cast<char*>(f.field.data()),
        static_cast<std::streamsize>(f.field.size() * sizeof(double)));
    if (!in)
        throw std::runtime_error("read_field: truncated payload in " + path);
    return f;
}

}  // namespace resil
