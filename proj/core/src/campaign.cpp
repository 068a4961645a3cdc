// Copyright (c) 2026 The resil authors
//
// SPDX-License-Identifier: Apache-2.0

#include "resil/campaign.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

namespace resil {
namespace {

std::string fmt_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

double parse_double(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

std::string sanitize(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

constexpr const char* csv_header =
    "bench,variant,case,cores,grain_us,error_p,n,tasks,reps,"
    "wall_mean_s,wall_stddev_s,executions,injected_failures,"
    "overhead_us_per_task,pct_extra_time,status";

void apply_case(Campaign& c) {
    if (c.stencil_case == "A") {
        c.subdomains = 128;
        c.points = 16000;
        c.iterations = 8192;
        c.steps = 128;
    } else if (c.stencil_case == "B") {
        c.subdomains = 256;
        c.points = 8000;
        c.iterations = 8192;
        c.steps = 128;
    }  // "desk" keeps the defaults
}

double mean_of(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v)
        m += x;
    return m / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v, double mean) {
    double var = 0.0;
    for (double x : v)
        var += (x - mean) * (x - mean);
    return std::sqrt(var / static_cast<double>(v.size()));
}

}  // namespace

Campaign parse_args(const std::vector<std::string>& args) {
    Campaign c;
    CLI::App app{"resiliency benchmark campaigns"};
    app.name("resil-bench");

    std::string bench = "artificial";
    std::string format = "csv";
    std::string fault_kind = "loud";
    std::string stencil_case;
    std::vector<std::string> variant_names;

    app.add_option("--bench", bench, "benchmark to run")
        ->check(CLI::IsMember({"artificial", "stencil"}));
    app.add_option("--variant", variant_names, "combinator variant (repeatable)");
    app.add_option("--cores", c.cores, "worker counts to sweep (repeatable)");
    app.add_option("--grain-us", c.grains_us, "task grain sizes in microseconds (repeatable)");
    app.add_option("--error-p", c.error_ps, "error probabilities in [0,1) (repeatable)");
    app.add_option("--n", c.ns, "replay attempts / replicate instances (repeatable)");
    app.add_option("--tasks", c.tasks, "task count for the artificial benchmark");
    app.add_option("--case", stencil_case, "stencil case")
        ->check(CLI::IsMember({"A", "B", "desk"}));
    auto* opt_s = app.add_option("--subdomains", c.subdomains, "stencil subdomain count");
    auto* opt_d = app.add_option("--points", c.points, "stencil points per subdomain");
    auto* opt_i = app.add_option("--iterations", c.iterations, "stencil iterations");
    auto* opt_g = app.add_option("--steps", c.steps, "stencil time steps per iteration");
    app.add_option("--nu", c.courant, "Courant number in (0,1]");
    app.add_option("--reps", c.reps, "repetitions per cell");
    app.add_option("--seed", c.seed, "base RNG seed (env RESIL_SEED overrides)");
    app.add_option("--out", c.out_path, "output path (default stdout)");
    app.add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--fault-kind", fault_kind, "injected fault kind")
        ->check(CLI::IsMember({"loud", "silent"}));
    app.add_flag("--no-timing", c.no_timing, "redact wall-clock columns for CI diffs");
    app.add_option("--dump-field", c.dump_field_path, "dump the stencil final field here");

    std::vector<const char*> argv;
    argv.push_back("resil-bench");
    for (const auto& a : args)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        throw UsageError(app.help());
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    c.bench = bench == "stencil" ? BenchKind::stencil : BenchKind::artificial;
    c.format = format == "json" ? OutputFormat::json : OutputFormat::csv;
    c.fault_kind = fault_kind == "silent" ? FaultKind::silent : FaultKind::loud;

    if (!stencil_case.empty()) {
        c.stencil_case = stencil_case;
        unsigned s = c.subdomains, d = c.points, i = c.iterations, g = c.steps;
        apply_case(c);
        // Explicit geometry flags override the case preset.
        if (opt_s->count()) c.subdomains = s;
        if (opt_d->count()) c.points = d;
        if (opt_i->count()) c.iterations = i;
        if (opt_g->count()) c.steps = g;
    }

    for (const auto& name : variant_names) {
        if (c.bench == BenchKind::artificial) {
            auto v = variant_from_string(name);
            if (!v)
                throw UsageError("--variant: unknown artificial variant '" + name + "'");
            c.variants.push_back(*v);
        } else {
            if (name == "pure_dataflow") c.stencil_variants.push_back(StencilVariant::pure_dataflow);
            else if (name == "replay") c.stencil_variants.push_back(StencilVariant::replay);
            else if (name == "replay_checksum") c.stencil_variants.push_back(StencilVariant::replay_checksum);
            else if (name == "replicate") c.stencil_variants.push_back(StencilVariant::replicate);
            else throw UsageError("--variant: unknown stencil variant '" + name + "'");
        }
    }
    if (c.variants.empty())
        c.variants.push_back(Variant::baseline);
    if (c.stencil_variants.empty())
        c.stencil_variants.push_back(StencilVariant::pure_dataflow);
    if (c.error_ps.empty())
        c.error_ps.push_back(0.0);
    if (c.cores.empty())
        c.cores.push_back(default_worker_count());
    if (c.grains_us.empty())
        c.grains_us.push_back(200.0);
    if (c.ns.empty())
        c.ns.push_back(3);

    for (double p : c.error_ps)
        if (!(p >= 0.0 && p < 1.0))
            throw UsageError("--error-p: probability out of range [0,1): " + fmt_double(p));
    for (unsigned w : c.cores)
        if (w < 1)
            throw UsageError("--cores: must be >= 1");
    for (double g : c.grains_us)
        if (g < 0.0)
            throw UsageError("--grain-us: must be >= 0");
    for (unsigned n : c.ns)
        if (n < 1)
            throw UsageError("--n: must be >= 1");
    if (c.reps < 1)
        throw UsageError("--reps: must be >= 1");
    if (c.tasks < 1)
        throw UsageError("--tasks: must be >= 1");
    if (!(c.courant > 0.0 && c.courant <= 1.0))
        throw UsageError("--nu: Courant number out of range (0,1]");
    if (c.points <= 2 * c.steps)
        throw UsageError("--points: must exceed 2 * --steps");

    if (const char* env = std::getenv("RESIL_SEED")) {
        std::uint64_t seed = 0;
        auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), seed);
        if (ec != std::errc{} || *ptr != '\0')
            throw UsageError("RESIL_SEED: not a valid integer");
        c.seed = seed;
    }
    return c;
}

namespace {

ReportRow base_row(const Campaign& campaign) {
    ReportRow row;
    row.bench = campaign.bench == BenchKind::stencil ? "stencil" : "artificial";
    row.stencil_case = campaign.bench == BenchKind::stencil ? campaign.stencil_case : "";
    row.reps = campaign.reps;
    row.timing_redacted = campaign.no_timing;
    return row;
}

void fill_report(ReportRow& row, const BenchReport& report) {
    row.wall_mean_s = report.wall_seconds;
    row.wall_stddev_s = report.wall_stddev;
    row.executions = report.executions;
    row.injected_failures = report.injected_failures;
    if (report.failed_handles > 0)
        row.status = "failed handles: " + std::to_string(report.failed_handles);
}

void run_artificial_campaign(const Campaign& campaign, std::vector<ReportRow>& rows) {
    for (unsigned cores : campaign.cores) {
        for (double grain_us : campaign.grains_us) {
            ArtificialConfig base;
            base.task_count = campaign.tasks;
            base.grain = std::chrono::nanoseconds(static_cast<std::int64_t>(grain_us * 1000.0));
            base.cores = cores;
            base.seed = campaign.seed;
            base.runs = campaign.reps;
            base.fault_kind = campaign.fault_kind;

            // Baseline measured first, in-session, so overhead and
            // percentage-extra columns cancel machine drift.
            ArtificialConfig bcfg = base;
            bcfg.variant = Variant::baseline;
            bcfg.error_p = 0.0;
            BenchReport baseline = run_artificial(bcfg);
            {
                ReportRow row = base_row(campaign);
                row.variant = "baseline";
                row.cores = cores;
                row.grain_us = grain_us;
                row.n = 1;
                row.tasks = campaign.tasks;
                fill_report(row, baseline);
                rows.push_back(row);
            }

            for (Variant variant : campaign.variants) {
                if (variant == Variant::baseline)
                    continue;  // auto-inserted above
                for (double p : campaign.error_ps) {
                    for (unsigned n : campaign.ns) {
                        ReportRow row = base_row(campaign);
                        row.variant = to_string(variant);
                        row.cores = cores;
                        row.grain_us = grain_us;
                        row.error_p = p;
                        row.n = n;
                        row.tasks = campaign.tasks;
                        try {
                            ArtificialConfig cfg = base;
                            cfg.variant = variant;
                            cfg.error_p = p;
                            cfg.n = n;
                            BenchReport report =
                                with_overhead(run_artificial(cfg), baseline, cfg.task_count);
                            fill_report(row, report);
                            row.overhead_us_per_task = report.amortized_overhead_us;
                            row.has_overhead = true;
                            row.pct_extra_time = 100.0 *
                                (report.wall_seconds - baseline.wall_seconds) /
                                baseline.wall_seconds;
                            row.has_pct = true;
                        } catch (const std::exception& e) {
                            row.status = sanitize(e.what());
                        }
                        rows.push_back(row);
                    }
                }
            }
        }
    }
}

struct StencilCell {
    BenchReport report;
    std::vector<double> field;
};

StencilCell run_stencil_cell(const Campaign& campaign, StencilVariant variant, unsigned cores,
    double p, unsigned n) {
    StencilConfig cfg;
    cfg.subdomains = campaign.subdomains;
    cfg.points = campaign.points;
    cfg.iterations = campaign.iterations;
    cfg.steps_per_iteration = campaign.steps;
    cfg.courant = campaign.courant;
    cfg.variant = variant;
    cfg.n = n;
    cfg.error_p = p;
    cfg.fault_kind = campaign.fault_kind;
    cfg.cores = cores;

    std::vector<double> walls;
    std::uint64_t executions = 0, failures = 0;
    StencilCell cell;
    for (unsigned rep = 0; rep < campaign.reps; ++rep) {
        cfg.seed = campaign.seed + rep;
        StencilResult r = run_stencil(cfg);
        walls.push_back(r.report.wall_seconds);
        executions += r.report.executions;
        failures += r.report.injected_failures;
        if (rep == 0)
            cell.field = std::move(r.field);
        else if (r.field != cell.field)
            throw std::runtime_error("stencil: final field differs between repetitions");
    }
    cell.report.wall_seconds = mean_of(walls);
    cell.report.wall_stddev = stddev_of(walls, cell.report.wall_seconds);
    cell.report.tasks_launched =
        static_cast<std::uint64_t>(campaign.subdomains) * campaign.iterations;
    cell.report.executions = executions / campaign.reps;
    cell.report.injected_failures = failures / campaign.reps;
    cell.report.runs_averaged = campaign.reps;
    return cell;
}

void run_stencil_campaign(const Campaign& campaign, std::vector<ReportRow>& rows) {
    for (unsigned cores : campaign.cores) {
        ReportRow brow = base_row(campaign);
        brow.variant = "pure_dataflow";
        brow.cores = cores;
        brow.n = 1;
        brow.tasks = static_cast<std::uint64_t>(campaign.subdomains) * campaign.iterations;
        StencilCell baseline;
        try {
            baseline = run_stencil_cell(campaign, StencilVariant::pure_dataflow, cores, 0.0, 1);
            fill_report(brow, baseline.report);
        } catch (const std::exception& e) {
            brow.status = sanitize(e.what());
            rows.push_back(brow);
            continue;
        }
        rows.push_back(brow);

        if (!campaign.dump_field_path.empty())
            write_field(campaign.dump_field_path, campaign.subdomains, campaign.points,
                baseline.field);

        for (StencilVariant variant : campaign.stencil_variants) {
            for (double p : campaign.error_ps) {
                if (variant == StencilVariant::pure_dataflow && p == 0.0)
                    continue;  // that's the baseline row
                for (unsigned n : campaign.ns) {
                    ReportRow row = base_row(campaign);
                    row.variant = to_string(variant);
                    row.cores = cores;
                    row.error_p = p;
                    row.n = n;
                    row.tasks = brow.tasks;
                    try {
                        StencilCell cell = run_stencil_cell(campaign, variant, cores, p, n);
                        fill_report(row, cell.report);
                        row.overhead_us_per_task =
                            (cell.report.wall_seconds - baseline.report.wall_seconds) /
                            static_cast<double>(row.tasks) * 1e6;
                        row.has_overhead = true;
                        row.pct_extra_time = 100.0 *
                            (cell.report.wall_seconds - baseline.report.wall_seconds) /
                            baseline.report.wall_seconds;
                        row.has_pct = true;
                        // Resilient variants must reproduce the fault-free
                        // field exactly.
                        if (variant != StencilVariant::pure_dataflow &&
                            cell.field != baseline.field)
                            row.status = "final field differs from fault-free baseline";
                    } catch (const std::exception& e) {
                        row.status = sanitize(e.what());
                    }
                    rows.push_back(row);
                }
            }
        }
    }
}

}  // namespace

std::vector<ReportRow> run_campaign(const Campaign& campaign) {
    std::vector<ReportRow> rows;
    if (campaign.bench == BenchKind::artificial)
        run_artificial_campaign(campaign, rows);
    else
        run_stencil_campaign(campaign, rows);
    return rows;
}

std::string to_csv(const std::vector<ReportRow>& rows) {
    std::ostringstream out;
    out << csv_header << '\n';
    for (const auto& r : rows) {
        out << r.bench << ',' << r.variant << ',' << r.stencil_case << ',' << r.cores << ','
            << fmt_double(r.grain_us) << ',' << fmt_double(r.error_p) << ',' << r.n << ','
            << r.tasks << ',' << r.reps << ',';
        if (r.timing_redacted)
            out << ",,";
        else
            out << fmt_double(r.wall_mean_s) << ',' << fmt_double(r.wall_stddev_s) << ',';
        out << r.executions << ',' << r.injected_failures << ',';
        if (!r.timing_redacted && r.has_overhead)
            out << fmt_double(r.overhead_us_per_task);
        out << ',';
        if (!r.timing_redacted && r.has_pct)
            out << fmt_double(r.pct_extra_time);
        out << ',' << sanitize(r.status) << '\n';
    }
    return out.str();
}

std::string to_json(const std::vector<ReportRow>& rows) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json o;
        o["bench"] = r.bench;
        o["variant"] = r.variant;
        o["case"] = r.stencil_case;
        o["cores"] = r.cores;
        o["grain_us"] = r.grain_us;
        o["error_p"] = r.error_p;
        o["n"] = r.n;
        o["tasks"] = r.tasks;
        o["reps"] = r.reps;
        if (!r.timing_redacted) {
            o["wall_mean_s"] = r.wall_mean_s;
            o["wall_stddev_s"] = r.wall_stddev_s;
        }
        o["executions"] = r.executions;
        o["injected_failures"] = r.injected_failures;
        if (!r.timing_redacted && r.has_overhead)
            o["overhead_us_per_task"] = r.overhead_us_per_task;
        if (!r.timing_redacted && r.has_pct)
            o["pct_extra_time"] = r.pct_extra_time;
        o["status"] = r.status;
        arr.push_back(std::move(o));
    }
    return arr.dump(2) + "\n";
}

std::vector<ReportRow> rows_from_csv(const std::string& text) {
    std::vector<ReportRow> rows;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (first) {
            first = false;
            continue;
        }
        if (line.empty())
            continue;
        std::vector<std::string> f;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ','))
            f.push_back(cell);
        while (f.size() < 16)
            f.push_back("");
        ReportRow r;
        r.bench = f[0];
        r.variant = f[1];
        r.stencil_case = f[2];
        r.cores = static_cast<unsigned>(std::stoul(f[3]));
        r.grain_us = parse_double(f[4]);
        r.error_p = parse_double(f[5]);
        r.n = static_cast<unsigned>(std::stoul(f[6]));
        r.tasks = std::stoull(f[7]);
        r.reps = static_cast<unsigned>(std::stoul(f[8]));
        r.timing_redacted = f[9].empty();
        if (!r.timing_redacted) {
            r.wall_mean_s = parse_double(f[9]);
            r.wall_stddev_s = parse_double(f[10]);
        }
        r.executions = std::stoull(f[11]);
        r.injected_failures = std::stoull(f[12]);
        r.has_overhead = !f[13].empty();
        if (r.has_overhead)
            r.overhead_us_per_task = parse_double(f[13]);
        r.has_pct = !f[14].empty();
        if (r.has_pct)
            r.pct_extra_time = parse_double(f[14]);
        r.status = f[15];
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<ReportRow> rows_from_json(const std::string& text) {
    std::vector<ReportRow> rows;
    auto arr = nlohmann::json::parse(text);
    for (const auto& o : arr) {
        ReportRow r;
        r.bench = o.at("bench").get<std::string>();
        r.variant = o.at("variant").get<std::string>();
        r.stencil_case = o.at("case").get<std::string>();
        r.cores = o.at("cores").get<unsigned>();
        r.grain_us = o.at("grain_us").get<double>();
        r.error_p = o.at("error_p").get<double>();
        r.n = o.at("n").get<unsigned>();
        r.tasks = o.at("tasks").get<std::uint64_t>();
        r.reps = o.at("reps").get<unsigned>();
        r.timing_redacted = !o.contains("wall_mean_s");
        if (!r.timing_redacted) {
            r.wall_mean_s = o.at("wall_mean_s").get<double>();
            r.wall_stddev_s = o.at("wall_stddev_s").get<double>();
        }
        r.executions = o.at("executions").get<std::uint64_t>();
        r.injected_failures = o.at("injected_failures").get<std::uint64_t>();
        r.has_overhead = o.contains("overhead_us_per_task");
        if (r.has_overhead)
            r.overhead_us_per_task = o.at("overhead_us_per_task").get<double>();
        r.has_pct = o.contains("pct_extra_time");
        if (r.has_pct)
            r.pct_extra_time = o.at("pct_extra_time").get<double>();
        r.status = o.at("status").get<std::string>();
        rows.push_back(std::move(r));
    }
    return rows;
}

void emit(const std::vector<ReportRow>& rows, OutputFormat format, const std::string& path) {
    if (rows.empty())
        throw std::runtime_error("emit: no results");
    std::string text = format == OutputFormat::json ? to_json(rows) : to_csv(rows);
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("emit: cannot open " + tmp);
        out << text;
        if (!out)
            throw std::runtime_error("emit: write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace resil
