// Copyright (c) 2026 The resil authors
//
// SPDX-License-Identifier: Apache-2.0
//
// 1D linear advection solved with the Lax-Wendroff scheme over decomposed
// subdomains. Each task advances one subdomain through several time steps by
// reading a ghost region from each periodic neighbor, and carries a
// flux-balance checksum that a validator can use to detect silent
// corruption. Tasks are wired into an iteration-deep dataflow DAG through
// the selected resiliency variant.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "resil/bench_report.hpp"
#include "resil/fault.hpp"
#include "resil/pool.hpp"

namespace resil {

enum class StencilVariant {
    pure_dataflow,
    replay,           // dataflow_replay, catches loud faults
    replay_checksum,  // dataflow_replay_validate with the checksum validator
    replicate,        // dataflow_replicate
};

std::string to_string(StencilVariant v);

struct StencilConfig {
    unsigned subdomains = 16;           // S
    unsigned points = 512;              // D, cells per subdomain; must exceed 2G
    unsigned iterations = 64;           // I
    unsigned steps_per_iteration = 8;   // G, also the ghost width
    double courant = 0.9;               // nu = c*dt/dx, in (0, 1]
    StencilVariant variant = StencilVariant::pure_dataflow;
    unsigned n = 3;                     // replay / replicate budget
    double error_p = 0.0;
    FaultKind fault_kind = FaultKind::loud;
    std::uint64_t seed = 0;
    unsigned cores = default_worker_count();
};

StencilConfig stencil_case_a();     // 128 x 16000, 8192 iterations of 128 steps
StencilConfig stencil_case_b();     // 256 x 8000, 8192 iterations of 128 steps
StencilConfig stencil_case_desk();  // 16 x 512, 64 iterations of 8 steps

/// Flux-balance witness for one subdomain task: the conservative update
/// satisfies output_sum == input_sum - (right_flux_sum - left_flux_sum) up
/// to rounding, and any corrupted output cell breaks the identity.
struct ChecksumWitness {
    double input_sum = 0.0;
    double left_flux_sum = 0.0;
    double right_flux_sum = 0.0;
    double output_sum = 0.0;
};

struct SubdomainState {
    std::vector<double> values;
    ChecksumWitness witness;
};

/// One Lax-Wendroff step over an extended array; returns the L-2 interior
/// cells. Exact at nu = 1 (unit shift) and the identity on constant input.
std::vector<double> lw_step(std::span<const double> extended, double nu);

/// Boundary flux between cells u0 and u1 for one step.
double lw_flux(double u0, double u1, double nu) noexcept;

/// Advance one subdomain `steps` time steps using ghost cells from its
/// neighbors, accumulating the checksum witness. Pure; no fault injection.
SubdomainState advance_subdomain(std::span<const double> left, std::span<const double> mid,
    std::span<const double> right, unsigned steps, double nu);

/// advance_subdomain plus fault injection: a loud fault throws after the
/// work is done, a silent fault corrupts one output cell and re-derives
/// output_sum from the corrupted data so validate_checksum rejects it.
SubdomainState subdomain_task(const SubdomainState& left, const SubdomainState& mid,
    const SubdomainState& right, unsigned steps, double nu, const FaultModel& fault,
    FailureCounter& counter);

bool validate_checksum(const SubdomainState& state);

/// Initial condition u(x) = sin(2*pi*x) sampled at x_j = j / (S*D).
std::vector<double> initial_field(unsigned subdomains, unsigned points);

struct StencilResult {
    std::vector<double> field;
    BenchReport report;
};

/// Build and execute the full dataflow DAG. Throws TaskError if the
/// resilience budget of any task is exhausted.
StencilResult run_stencil(const StencilConfig& cfg);

/// Flat little-endian dump of a final field: 16-byte header (magic "RST1",
/// u32 subdomain count, u32 points per subdomain, u32 reserved) followed by
/// S*D float64 values.
void write_field(const std::string& path, unsigned subdomains, unsigned points,
    std::span<const double> field);
struct FieldFile {
    unsigned subdomains = 0;
    unsigned points = 0;
    std::vector<double> field;
};
FieldFile read_field(const std::string& path);

}  // namespace resil
