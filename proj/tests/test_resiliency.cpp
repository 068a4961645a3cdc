// Copyright (c) 2026 The resil authors
//
// SPDX-License-Identifier: Apache-2.0
//
// Combinator semantics under deterministic fault scripts. All scripted
// cases run on a single-worker FIFO pool so invocation order equals launch
// order and every outcome is a pure function of the script.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "resil/pool.hpp"
#include "resil/resiliency.hpp"
#include "resil/runtime.hpp"
#include "support/combinator_reference.hpp"

using namespace resil;

namespace {

const RuntimeConfig kSerial{1, QueuePolicy::fifo};

struct ScriptedTask {
    // Shared across copies so every instance consumes the same script.
    std::shared_ptr<std::atomic<unsigned>> cursor = std::make_shared<std::atomic<unsigned>>(0);
    std::shared_ptr<std::vector<reftest::Step>> script;

    explicit ScriptedTask(std::vector<reftest::Step> steps)
        : script(std::make_shared<std::vector<reftest::Step>>(std::move(steps))) {}

    int operator()() const {
        unsigned i = cursor->fetch_add(1);
        const reftest::Step& step = (*script)[std::min<std::size_t>(i, script->size() - 1)];
        if (step.fault)
            throw std::runtime_error("e" + std::to_string(i + 1));
        return step.value;
    }

    unsigned executions() const { return cursor->load(); }
};

reftest::Step ok(int v) { return {false, v}; }
reftest::Step fault() { return {true, 0}; }

bool is42(int v) { return v == 42; }

}  // namespace

TEST_CASE("async_replay resolves on first success") {
    run_pool(kSerial, [] {
        ScriptedTask t({ok(42)});
        auto h = async_replay(3, t);
        CHECK(h.get() == 42);
        CHECK(t.executions() == 1);
    });
}

TEST_CASE("async_replay retries through faults") {
    run_pool(kSerial, [] {
        ScriptedTask t({fault(), fault(), ok(7)});
        auto h = async_replay(3, t);
        CHECK(h.get() == 7);
        CHECK(t.executions() == 3);
    });
}

TEST_CASE("async_replay exhaustion reports the last fault") {
    run_pool(kSerial, [] {
        ScriptedTask t({fault(), fault(), fault()});
        auto h = async_replay(3, t);
        h.wait();
        CHECK(!h.has_value());
        CHECK(h.error().kind == ErrorKind::replay_exhausted);
        REQUIRE(h.error().cause != nullptr);
        CHECK(h.error().cause->message == "e3");
        CHECK(t.executions() == 3);
    });
}

TEST_CASE("async_replay_validate accepts a valid first result") {
    run_pool(kSerial, [] {
        ScriptedTask t({ok(42)});
        auto h = async_replay_validate(2, &is42, t);
        CHECK(h.get() == 42);
        CHECK(t.executions() == 1);
    });
}

TEST_CASE("async_replay_validate retries invalid results") {
    run_pool(kSerial, [] {
        ScriptedTask t({ok(7), ok(7), ok(42)});
        auto h = async_replay_validate(3, &is42, t);
        CHECK(h.get() == 42);
        CHECK(t.executions() == 3);
    });
}

TEST_CASE("async_replay_validate exhausts as validation_exhausted") {
    run_pool(kSerial, [] {
        ScriptedTask t({ok(7), ok(7)});
        auto h = async_replay_validate(2, &is42, t);
        h.wait();
        CHECK(!h.has_value());
        CHECK(h.error().kind == ErrorKind::validation_exhausted);
        CHECK(t.executions() == 2);
    });
}

TEST_CASE("dataflow_replay reuses resolved dependency values") {
    run_pool(kSerial, [] {
        auto dep_runs = std::make_shared<std::atomic<unsigned>>(0);
        std::vector<TaskHandle<int>> deps{
            spawn([dep_runs] {
                dep_runs->fetch_add(1);
                return 1;
            }),
            TaskHandle<int>::resolved(2),
        };
        auto attempts = std::make_shared<std::atomic<unsigned>>(0);
        auto h = dataflow_replay(
            3,
            [attempts](const std::vector<int>& vs) {
                if (attempts->fetch_add(1) == 0)
                    throw std::runtime_error("flaky");
                return vs[0] + vs[1];
            },
            std::move(deps));
        CHECK(h.get() == 3);
        CHECK(attempts->load() == 2);
        CHECK(dep_runs->load() == 1);
    });
}

TEST_CASE("dataflow_replay propagates a failed dependency without consuming attempts") {
    run_pool(kSerial, [] {
        ScriptedTask t({ok(42)});
        std::vector<TaskHandle<int>> deps{
            TaskHandle<int>::failed(make_error(ErrorKind::task_fault, "dead dep"))};
        auto h = dataflow_replay(3, [t](const std::vector<int>&) { return t(); }, std::move(deps));
        h.wait();
        CHECK(!h.has_value());
        CHECK(h.error().kind == ErrorKind::task_fault);
        CHECK(h.error().message == "dead dep");
        CHECK(t.executions() == 0);
    });
}

TEST_CASE("n=1 replay equals plain dataflow for a fault-free task") {
    run_pool(kSerial, [] {
        auto sum = [](const std::vector<int>& vs) { return vs[0] + vs[1]; };
        std::vector<TaskHandle<int>> deps{
            TaskHandle<int>::resolved(40), TaskHandle<int>::resolved(2)};
        auto plain = dataflow(sum, deps);
        auto replayed = dataflow_replay(1, sum, deps);
        CHECK(plain.get() == replayed.get());
    });
}

TEST_CASE("async_replicate runs exactly n instances and picks the smallest index") {
    run_pool(kSerial, [] {
        ScriptedTask all42({ok(42), ok(42), ok(42)});
        auto h = async_replicate(3, all42);
        CHECK(h.get() == 42);
        CHECK(all42.executions() == 3);

        ScriptedTask mixed({fault(), ok(7), ok(9)});
        auto g = async_replicate(3, mixed);
        CHECK(g.get() == 7);
        CHECK(mixed.executions() == 3);
    });
}

TEST_CASE("async_replicate all-fault reports the last-finishing fault") {
    run_pool(kSerial, [] {
        ScriptedTask t({fault(), fault(), fault()});
        auto h = async_replicate(3, t);
        h.wait();
        CHECK(!h.has_value());
        CHECK(h.error().kind == ErrorKind::all_replicas_failed);
        REQUIRE(h.error().cause != nullptr);
        CHECK(h.error().cause->message == "e3");
        CHECK(t.executions() == 3);
    });
}

TEST_CASE("async_replicate_validate filters results") {
    run_pool(kSerial, [] {
        ScriptedTask t({ok(7), ok(42), ok(42)});
        auto h = async_replicate_validate(3, &is42, t);
        CHECK(h.get() == 42);
        CHECK(t.executions() == 3);

        ScriptedTask bad({ok(7), ok(7)});
        auto g = async_replicate_validate(2, &is42, bad);
        g.wait();
        CHECK(!g.has_value());
        CHECK(g.error().kind == ErrorKind::validation_exhausted);

        ScriptedTask single({ok(42)});
        auto s = async_replicate_validate(1, [](int) { return true; }, single);
        CHECK(s.get() == 42);
    });
}

TEST_CASE("async_replicate_vote builds a consensus over successes") {
    run_pool(kSerial, [] {
        ScriptedTask t({ok(42), ok(7), ok(42)});
        auto h = async_replicate_vote(3, &majority_vote<int>, t);
        CHECK(h.get() == 42);

        ScriptedTask survivor({fault(), ok(7), fault()});
        auto g = async_replicate_vote(3, &majority_vote<int>, survivor);
        CHECK(g.get() == 7);

        ScriptedTask dead({fault(), fault(), fault()});
        auto f = async_replicate_vote(3, &majority_vote<int>, dead);
        f.wait();
        CHECK(!f.has_value());
        CHECK(f.error().kind == ErrorKind::all_replicas_failed);
    });
}

TEST_CASE("a fault inside the voter surfaces as task_fault") {
    run_pool(kSerial, [] {
        ScriptedTask t({ok(1), ok(2), ok(3)});
        auto h = async_replicate_vote(
            3, [](std::vector<int>) -> int { throw std::runtime_error("split vote"); }, t);
        h.wait();
        CHECK(!h.has_value());
        CHECK(h.error().kind == ErrorKind::task_fault);
        CHECK(h.error().message == "split vote");
    });
}

TEST_CASE("async_replicate_vote_validate filters then votes") {
    run_pool(kSerial, [] {
        ScriptedTask t({ok(41), ok(42), ok(42), fault()});
        auto h = async_replicate_vote_validate(
            4, &majority_vote<int>, [](int v) { return v > 41; }, t);
        CHECK(h.get() == 42);
        CHECK(t.executions() == 4);

        ScriptedTask low({ok(1), ok(2)});
        auto g = async_replicate_vote_validate(
            2, &majority_vote<int>, [](int v) { return v > 100; }, low);
        g.wait();
        CHECK(!g.has_value());
        CHECK(g.error().kind == ErrorKind::validation_exhausted);

        ScriptedTask single({ok(42)});
        auto s = async_replicate_vote_validate(
            1, [](std::vector<int> vs) { return vs.at(0); }, [](int) { return true; }, single);
        CHECK(s.get() == 42);
    });
}

TEST_CASE("dataflow_replicate shares dependency values across instances") {
    run_pool(kSerial, [] {
        auto dep_runs = std::make_shared<std::atomic<unsigned>>(0);
        std::vector<TaskHandle<int>> deps{spawn([dep_runs] {
            dep_runs->fetch_add(1);
            return 21;
        })};
        auto execs = std::make_shared<std::atomic<unsigned>>(0);
        auto h = dataflow_replicate(
            3,
            [execs](const std::vector<int>& vs) {
                execs->fetch_add(1);
                return 2 * vs[0];
            },
            std::move(deps));
        CHECK(h.get() == 42);
        CHECK(execs->load() == 3);
        CHECK(dep_runs->load() == 1);
    });
}

TEST_CASE("dataflow_replicate propagates a failed dependency before launching") {
    run_pool(kSerial, [] {
        ScriptedTask t({ok(42)});
        std::vector<TaskHandle<int>> deps{
            TaskHandle<int>::failed(make_error(ErrorKind::task_fault, "gone"))};
        auto h =
            dataflow_replicate(3, [t](const std::vector<int>&) { return t(); }, std::move(deps));
        h.wait();
        CHECK(!h.has_value());
        CHECK(h.error().message == "gone");
        CHECK(t.executions() == 0);
    });
}

TEST_CASE("n=1 replicate variants equal plain dataflow for a fault-free task") {
    run_pool(kSerial, [] {
        auto doubled = [](const std::vector<int>& vs) { return 2 * vs[0]; };
        std::vector<TaskHandle<int>> deps{TaskHandle<int>::resolved(21)};
        CHECK(dataflow(doubled, deps).get() == 42);
        CHECK(dataflow_replicate(1, doubled, deps).get() == 42);
        CHECK(dataflow_replicate_validate(1, &is42, doubled, deps).get() == 42);
        CHECK(dataflow_replicate_vote(1, &majority_vote<int>, doubled, deps).get() == 42);
        CHECK(dataflow_replicate_vote_validate(1, &majority_vote<int>, &is42, doubled, deps).get()
            == 42);
    });
}

TEST_CASE("n must be at least 1") {
    run_pool(kSerial, [] {
        auto f = [] { return 0; };
        auto df = [](const std::vector<int>&) { return 0; };
        std::vector<TaskHandle<int>> deps{TaskHandle<int>::resolved(0)};
        CHECK_THROWS_AS(async_replay(0, f), std::invalid_argument);
        CHECK_THROWS_AS(async_replicate(0, f), std::invalid_argument);
        CHECK_THROWS_AS(dataflow_replay(0, df, deps), std::invalid_argument);
        CHECK_THROWS_AS(dataflow_replicate(0, df, deps), std::invalid_argument);
    });
}

TEST_CASE("majority_vote picks the most frequent value, ties to the earliest") {
    CHECK(majority_vote<int>({42, 7, 42}) == 42);
    CHECK(majority_vote<int>({7}) == 7);
    CHECK(majority_vote<int>({1, 2}) == 1);          // tie -> smaller index
    CHECK(majority_vote<int>({2, 1, 1, 2}) == 2);    // tie -> first occurrence
    CHECK_THROWS_AS(majority_vote<int>({}), std::invalid_argument);
}

TEST_CASE("fault-free transparency: every combinator matches a plain spawn") {
    run_pool(kSerial, [] {
        auto f = [] { return 42; };
        auto df = [](const std::vector<int>&) { return 42; };
        std::vector<TaskHandle<int>> deps{TaskHandle<int>::resolved(0)};
        auto always = [](int) { return true; };
        int expected = spawn(f).get();
        CHECK(async_replay(3, f).get() == expected);
        CHECK(async_replay_validate(3, always, f).get() == expected);
        CHECK(async_replicate(3, f).get() == expected);
        CHECK(async_replicate_validate(3, always, f).get() == expected);
        CHECK(async_replicate_vote(3, &majority_vote<int>, f).get() == expected);
        CHECK(async_replicate_vote_validate(3, &majority_vote<int>, always, f).get() == expected);
        CHECK(dataflow_replay(3, df, deps).get() == expected);
        CHECK(dataflow_replay_validate(3, always, df, deps).get() == expected);
        CHECK(dataflow_replicate(3, df, deps).get() == expected);
        CHECK(dataflow_replicate_validate(3, always, df, deps).get() == expected);
        CHECK(dataflow_replicate_vote(3, &majority_vote<int>, df, deps).get() == expected);
        CHECK(dataflow_replicate_vote_validate(3, &majority_vote<int>, always, df, deps).get()
            == expected);
    });
}

TEST_CASE("combinator arguments are forwarded") {
    run_pool(kSerial, [] {
        auto add = [](int a, int b) { return a + b; };
        CHECK(async_replay(2, add, 40, 2).get() == 42);
        CHECK(async_replicate(2, add, 40, 2).get() == 42);
    });
}

TEST_CASE("randomized scripts match the reference interpreter") {
    std::mt19937 rng(0xC0FFEE);
    run_pool(kSerial, [&rng] {
        for (reftest::Family family : reftest::all_families()) {
            for (int round = 0; round < 300; ++round) {
                reftest::Scenario s = reftest::random_scenario(family, rng);
                reftest::Outcome expected = reftest::interpret(s);
                reftest::Outcome actual = reftest::execute(s);
                INFO("family=" << reftest::family_name(family) << " round=" << round);
                CHECK(reftest::outcomes_match(expected, actual));
            }
        }
    });
}
