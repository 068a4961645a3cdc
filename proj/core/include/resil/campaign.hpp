// Copyright (c) 2026 The resil authors
//
// SPDX-License-Identifier: Apache-2.0
//
// Benchmark campaigns: parse CLI flags into a sweep over configuration
// axes, run the cells sequentially, and emit plot-ready CSV or JSON rows.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "resil/bench.hpp"
#include "resil/stencil.hpp"

namespace resil {

enum class BenchKind { artificial, stencil };
enum class OutputFormat { csv, json };

/// Invalid command line; the CLI reports it and exits with status 2.
class UsageError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Campaign {
    BenchKind bench = BenchKind::artificial;
    std::vector<Variant> variants;                  // artificial axes
    std::vector<StencilVariant> stencil_variants;   // stencil axes
    std::vector<double> error_ps;
    std::vector<unsigned> cores;
    std::vector<double> grains_us;
    std::vector<unsigned> ns;
    std::uint64_t tasks = 100'000;
    FaultKind fault_kind = FaultKind::loud;
    // Stencil geometry; "desk" unless overridden by --case or explicit flags.
    std::string stencil_case = "desk";
    unsigned subdomains = 16;
    unsigned points = 512;
    unsigned iterations = 64;
    unsigned steps = 8;
    double courant = 0.9;
    unsigned reps = 10;
    std::uint64_t seed = 0;
    std::string out_path;  // empty -> stdout
    OutputFormat format = OutputFormat::csv;
    bool no_timing = false;          // redact wall-clock columns for CI diffs
    std::string dump_field_path;     // stencil final-field dump, optional
};

/// Parse argv (without the program name) into a validated Campaign.
/// Throws UsageError naming the offending flag.
Campaign parse_args(const std::vector<std::string>& args);

struct ReportRow {
    std::string bench;
    std::string variant;
    std::string stencil_case;
    unsigned cores = 0;
    double grain_us = 0.0;
    double error_p = 0.0;
    unsigned n = 0;
    std::uint64_t tasks = 0;
    unsigned reps = 0;
    double wall_mean_s = 0.0;
    double wall_stddev_s = 0.0;
    std::uint64_t executions = 0;
    std::uint64_t injected_failures = 0;
    double overhead_us_per_task = 0.0;
    bool has_overhead = false;
    double pct_extra_time = 0.0;
    bool has_pct = false;
    bool timing_redacted = false;
    std::string status = "ok";  // "ok" or the cell's error message

    bool ok() const { return status == "ok"; }
};

/// Execute the Cartesian product of the campaign's sweep axes. A baseline
/// cell is auto-inserted per (cores, grain) so percentage-extra columns can
/// be computed. Individual cell failures are recorded in their row; the
/// campaign continues.
std::vector<ReportRow> run_campaign(const Campaign& campaign);

std::string to_csv(const std::vector<ReportRow>& rows);
std::string to_json(const std::vector<ReportRow>& rows);

/// Parse rows back from emitted output (used to check the two formats agree).
std::vector<ReportRow> rows_from_csv(const std::string& text);
std::vector<ReportRow> rows_from_json(const std::string& text);

/// Write rows atomically (temp file + rename); path "" or "-" means stdout.
void emit(const std::vector<ReportRow>& rows, OutputFormat format, const std::string& path);

}  // namespace resil
