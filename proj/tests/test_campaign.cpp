// Copyright (c) 2026 The resil authors
//
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "resil/campaign.hpp"

using namespace resil;

namespace {

bool rows_equal(const ReportRow& a, const ReportRow& b) {
    return a.bench == b.bench && a.variant == b.variant && a.stencil_case == b.stencil_case
        && a.cores == b.cores && a.grain_us == b.grain_us && a.error_p == b.error_p && a.n == b.n
        && a.tasks == b.tasks && a.reps == b.reps && a.wall_mean_s == b.wall_mean_s
        && a.wall_stddev_s == b.wall_stddev_s && a.executions == b.executions
        && a.injected_failures == b.injected_failures && a.has_overhead == b.has_overhead
        && (!a.has_overhead || a.overhead_us_per_task == b.overhead_us_per_task)
        && a.has_pct == b.has_pct && (!a.has_pct || a.pct_extra_time == b.pct_extra_time)
        && a.timing_redacted == b.timing_redacted && a.status == b.status;
}

bool all_equal(const std::vector<ReportRow>& a, const std::vector<ReportRow>& b) {
    if (a.size() != b.size())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!rows_equal(a[i], b[i]))
            return false;
    return true;
}

Campaign tiny_artificial() {
    return parse_args({"--bench", "artificial", "--tasks", "200", "--grain-us", "0", "--cores",
        "1", "--reps", "1", "--seed", "9"});
}

std::string read_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace

TEST_CASE("defaults") {
    Campaign c = parse_args({});
    CHECK(c.bench == BenchKind::artificial);
    CHECK(c.variants == std::vector<Variant>{Variant::baseline});
    CHECK(c.error_ps == std::vector<double>{0.0});
    CHECK(c.grains_us == std::vector<double>{200.0});
    CHECK(c.ns == std::vector<unsigned>{3});
    CHECK(c.reps == 10);
    CHECK(c.format == OutputFormat::csv);
    CHECK(!c.no_timing);
}

TEST_CASE("a one-cell campaign parses") {
    Campaign c = parse_args(
        {"--bench", "artificial", "--variant", "async_replay", "--error-p", "0.05", "--cores", "4"});
    CHECK(c.bench == BenchKind::artificial);
    CHECK(c.variants == std::vector<Variant>{Variant::async_replay});
    CHECK(c.error_ps == std::vector<double>{0.05});
    CHECK(c.cores == std::vector<unsigned>{4});
}

TEST_CASE("out-of-range and unknown flags are usage errors") {
    CHECK_THROWS_AS(parse_args({"--error-p", "1.5"}), UsageError);
    CHECK_THROWS_AS(parse_args({"--error-p", "-0.1"}), UsageError);
    CHECK_THROWS_AS(parse_args({"--flux-capacitor"}), UsageError);
    CHECK_THROWS_AS(parse_args({"--variant", "warp_drive"}), UsageError);
    CHECK_THROWS_AS(parse_args({"--bench", "stencil", "--variant", "async_replay"}), UsageError);
    CHECK_THROWS_AS(parse_args({"--n", "0"}), UsageError);
    CHECK_THROWS_AS(parse_args({"--reps", "0"}), UsageError);
    CHECK_THROWS_AS(parse_args({"--cores", "0"}), UsageError);
    CHECK_THROWS_AS(parse_args({"--nu", "1.5"}), UsageError);
    CHECK_THROWS_AS(parse_args({"--case", "C"}), UsageError);
    CHECK_THROWS_AS(
        parse_args({"--bench", "stencil", "--points", "16", "--steps", "8"}), UsageError);
}

TEST_CASE("stencil cases select the published geometry") {
    Campaign a = parse_args({"--bench", "stencil", "--case", "A"});
    CHECK(a.subdomains == 128);
    CHECK(a.points == 16000);
    CHECK(a.iterations == 8192);
    CHECK(a.steps == 128);

    Campaign b = parse_args({"--bench", "stencil", "--case", "B"});
    CHECK(b.subdomains == 256);
    CHECK(b.points == 8000);

    Campaign desk = parse_args({"--bench", "stencil", "--case", "desk"});
    CHECK(desk.subdomains == 16);
    CHECK(desk.points == 512);
    CHECK(desk.iterations == 64);
    CHECK(desk.steps == 8);

    // Explicit geometry flags override the preset.
    Campaign mixed = parse_args({"--bench", "stencil", "--case", "A", "--points", "4000"});
    CHECK(mixed.subdomains == 128);
    CHECK(mixed.points == 4000);
}

TEST_CASE("RESIL_SEED overrides --seed") {
    setenv("RESIL_SEED", "777", 1);
    Campaign c = parse_args({"--seed", "5"});
    CHECK(c.seed == 777);

    setenv("RESIL_SEED", "not-a-number", 1);
    CHECK_THROWS_AS(parse_args({}), UsageError);
    unsetenv("RESIL_SEED");

    Campaign d = parse_args({"--seed", "5"});
    CHECK(d.seed == 5);
}

TEST_CASE("campaign cell counting") {
    Campaign c = tiny_artificial();
    c.variants = {Variant::async_replay, Variant::async_replicate};
    c.error_ps = {0.0, 0.1, 0.2};
    c.ns = {10};  // deep budget so no cell exhausts its retries
    auto rows = run_campaign(c);
    // 1 auto-inserted baseline + 2 variants x 3 error rates x 1 n.
    REQUIRE(rows.size() == 7);
    CHECK(rows[0].variant == "baseline");
    for (const auto& row : rows) {
        CHECK(row.ok());
        CHECK(row.reps == 1);
    }
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].has_overhead);
        CHECK(rows[i].has_pct);
    }
}

TEST_CASE("CSV and JSON round-trip to identical row sets") {
    Campaign c = tiny_artificial();
    c.variants = {Variant::async_replay};
    c.error_ps = {0.0, 0.25};
    auto rows = run_campaign(c);
    REQUIRE(!rows.empty());

    auto from_csv = rows_from_csv(to_csv(rows));
    CHECK(all_equal(rows, from_csv));

    auto from_json = rows_from_json(to_json(rows));
    CHECK(all_equal(rows, from_json));

    CHECK(all_equal(from_csv, from_json));
}

TEST_CASE("emit writes atomically and rejects empty row sets") {
    auto dir = std::filesystem::temp_directory_path();
    auto path = (dir / "resil_campaign_test.csv").string();

    CHECK_THROWS_WITH_AS(emit({}, OutputFormat::csv, path), "emit: no results",
        std::runtime_error);

    Campaign c = tiny_artificial();
    auto rows = run_campaign(c);
    emit(rows, OutputFormat::csv, path);
    CHECK(!std::filesystem::exists(path + ".tmp"));
    auto parsed = rows_from_csv(read_all(path));
    CHECK(all_equal(rows, parsed));
    std::filesystem::remove(path);

    auto jpath = (dir / "resil_campaign_test.json").string();
    emit(rows, OutputFormat::json, jpath);
    CHECK(all_equal(rows, rows_from_json(read_all(jpath))));
    std::filesystem::remove(jpath);
}

TEST_CASE("no-timing campaigns are byte-identical across reruns") {
    Campaign c = parse_args({"--bench", "artificial", "--variant", "async_replay", "--variant",
        "async_replicate_validate", "--error-p", "0.2", "--tasks", "500", "--grain-us", "0",
        "--cores", "1", "--reps", "2", "--seed", "42", "--no-timing"});
    std::string first = to_csv(run_campaign(c));
    std::string second = to_csv(run_campaign(c));
    CHECK(first == second);
    CHECK(to_json(run_campaign(c)) == to_json(run_campaign(c)));
}

TEST_CASE("stencil campaign checks resilient fields against the baseline") {
    auto dump = (std::filesystem::temp_directory_path() / "resil_campaign_field.bin").string();
    Campaign c = parse_args({"--bench", "stencil", "--subdomains", "4", "--points", "32",
        "--iterations", "8", "--steps", "4", "--variant", "replay", "--variant",
        "replay_checksum", "--error-p", "0.2", "--n", "10", "--cores", "1", "--reps", "2",
        "--seed", "3", "--dump-field", dump, "--fault-kind", "loud"});
    auto rows = run_campaign(c);
    REQUIRE(rows.size() == 3);  // baseline + replay + replay_checksum
    for (const auto& row : rows) {
        INFO(row.variant << ": " << row.status);
        CHECK(row.ok());
    }
    CHECK(rows[1].injected_failures > 0);

    auto field = read_field(dump);
    CHECK(field.subdomains == 4);
    CHECK(field.points == 32);
    CHECK(field.field.size() == 4 * 32);
    std::filesystem::remove(dump);
}

TEST_CASE("a failing cell is recorded and the campaign continues") {
    Campaign c = tiny_artificial();
    c.bench = BenchKind::stencil;
    c.stencil_variants = {StencilVariant::replay};
    c.subdomains = 4;
    c.points = 32;
    c.iterations = 8;
    c.steps = 4;
    c.error_ps = {0.9};  // n=1 replay at p=0.9: budget exhausted almost surely
    c.ns = {1};
    auto rows = run_campaign(c);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].ok());   // fault-free baseline
    CHECK(!rows[1].ok());  // exhaustion recorded, not thrown
}

TEST_CASE("the CLI binary reports usage and campaign status via exit codes") {
    const char* bin = std::getenv("RESIL_BENCH_BIN");
    REQUIRE(bin != nullptr);
    std::string binary(bin);
    auto dir = std::filesystem::temp_directory_path();
    auto out = (dir / "resil_cli_test.csv").string();

    auto run = [](const std::string& cmd) {
        int rc = std::system(cmd.c_str());
        return WEXITSTATUS(rc);
    };

    CHECK(run(binary + " --flux-capacitor 2>/dev/null") == 2);
    CHECK(run(binary + " --error-p 1.5 2>/dev/null") == 2);

    CHECK(run(binary + " --bench artificial --tasks 100 --grain-us 0 --cores 1 --reps 1 --out "
              + out) == 0);
    auto rows = rows_from_csv(read_all(out));
    REQUIRE(!rows.empty());
    CHECK(rows[0].variant == "baseline");
    std::filesystem::remove(out);

    // A campaign whose cell fails its resilience budget exits non-zero.
    CHECK(run(binary + " --bench stencil --subdomains 4 --points 32 --iterations 8 --steps 4"
              " --variant replay --error-p 0.9 --n 1 --cores 1 --reps 1 --out " + out
              + " 2>/dev/null") == 1);
}
