#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "aft/pattern_dag.hpp"
#include "aft/rng.hpp"

using namespace aft::pattern;

namespace {

std::set<std::string> node_ids(const DagSnapshot& dag) {
    std::set<std::string> ids;
    for (const ComponentNode& node : dag.nodes())
        ids.insert(node.id);
    return ids;
}

std::set<std::pair<std::string, std::string>> edge_set(const DagSnapshot& dag) {
    std::set<std::pair<std::string, std::string>> edges;
    for (const Edge& edge : dag.edges())
        edges.insert({edge.from, edge.to});
    return edges;
}

std::vector<aft::fault::ActiveFault> faults_on(const std::string& target,
                                               aft::fault::FaultClass cls) {
    return {{target, cls}};
}

} // namespace

TEST_CASE("snapshot construction validates the graph") {
    CHECK_THROWS_AS(DagSnapshot({{"a", NodeKind::plain, 10}, {"a", NodeKind::plain, 10}}, {}),
                    aft::ConfigError);
    CHECK_THROWS_AS(DagSnapshot({{"a", NodeKind::plain, 10}}, {{"a", "b"}}),
                    aft::ConfigError);
    CHECK_THROWS_AS(DagSnapshot({{"a", NodeKind::plain, 10}, {"b", NodeKind::plain, 10}},
                                {{"a", "b"}, {"a", "b"}}),
                    aft::ConfigError);
    CHECK_THROWS_AS(DagSnapshot({{"a", NodeKind::plain, 10}, {"b", NodeKind::plain, 10}},
                                {{"a", "b"}, {"b", "a"}}),
                    aft::ConfigError);
    CHECK_THROWS_AS(DagSnapshot({{"a", NodeKind::redoing_wrapper, 0}}, {}),
                    aft::ConfigError);
}

TEST_CASE("topological order respects every edge") {
    DagSnapshot dag = make_redoing_dag();
    std::vector<std::string> order = dag.topological_order();
    CHECK(order.size() == dag.nodes().size());
    auto position = [&](const std::string& id) {
        return std::find(order.begin(), order.end(), id) - order.begin();
    };
    for (const Edge& edge : dag.edges())
        CHECK(position(edge.from) < position(edge.to));
}

TEST_CASE("injection swaps the wrapper for the two-version pattern") {
    DagSnapshot d1 = make_redoing_dag("c3", 10);
    DagSnapshot d2 = inject(d1, make_reconfiguration_subgraph("c3"), "c3");

    CHECK(node_ids(d2) == std::set<std::string>{"c1", "c2", "c3.1", "c3.2", "c4", "w"});
    CHECK(d2.node("c3.1").kind == NodeKind::primary_replica);
    CHECK(d2.node("c3.2").kind == NodeKind::secondary_replica);

    std::set<std::pair<std::string, std::string>> expected = {
        {"c1", "c3.1"}, {"c1", "c3.2"}, {"c2", "c3.1"}, {"c2", "c3.2"},
        {"c3.1", "c4"}, {"c3.2", "c4"}, {"c3.1", "w"},  {"c3.2", "w"},
    };
    CHECK(edge_set(d2) == expected);
}

TEST_CASE("identity injection keeps the graph shape") {
    DagSnapshot d1 = make_redoing_dag("c3", 10);
    DagSnapshot same = inject(
        d1, DagSnapshot({{"c3", NodeKind::redoing_wrapper, 10}}, {}), "c3");
    CHECK(node_ids(same) == node_ids(d1));
    CHECK(edge_set(same) == edge_set(d1));
    CHECK(same.node("c3").kind == NodeKind::redoing_wrapper);
}

TEST_CASE("injection rejects unknown targets and id collisions") {
    DagSnapshot d1 = make_redoing_dag();
    CHECK_THROWS_AS(inject(d1, make_reconfiguration_subgraph("c99"), "c99"),
                    aft::ConfigError);
    CHECK_THROWS_AS(inject(d1, DagSnapshot({{"c4", NodeKind::plain, 10}}, {}), "c3"),
                    aft::ConfigError);
}

TEST_CASE("redoing absorbs a transient fault with one redo") {
    DagSnapshot d1 = make_redoing_dag();
    AlphaStates alpha;
    aft::alpha::AlphaConfig cfg;
    StepOutcome outcome = execute_step(
        d1, faults_on("c3", aft::fault::FaultClass::transient), alpha, cfg);
    CHECK(outcome.success);
    REQUIRE(outcome.channels.size() == 1);
    CHECK(outcome.channels[0].channel == "c3");
    CHECK(outcome.channels[0].failed_attempts == 1);
    CHECK(outcome.channels[0].watchdog_fired);
    CHECK_FALSE(outcome.channels[0].task_failure);
    CHECK(outcome.channels[0].alpha_after == 1.0);
    CHECK(outcome.switch_requests.empty());
}

TEST_CASE("an active intermittent fault also costs exactly one redo") {
    DagSnapshot d1 = make_redoing_dag();
    AlphaStates alpha;
    aft::alpha::AlphaConfig cfg;
    StepOutcome outcome = execute_step(
        d1, faults_on("c3", aft::fault::FaultClass::intermittent), alpha, cfg);
    CHECK(outcome.success);
    CHECK(outcome.channels[0].failed_attempts == 1);
}

TEST_CASE("a permanent fault exhausts the redo budget and latches on the fourth firing") {
    DagSnapshot d1 = make_redoing_dag("c3", 10);
    AlphaStates alpha;
    aft::alpha::AlphaConfig cfg; // T = 3.0
    auto faults = faults_on("c3", aft::fault::FaultClass::permanent);

    const double expected_alpha[] = {1.0, 2.0, 3.0, 4.0};
    for (int step_no = 0; step_no < 4; ++step_no) {
        StepOutcome outcome = execute_step(d1, faults, alpha, cfg);
        CHECK_FALSE(outcome.success);
        REQUIRE(outcome.channels.size() == 1);
        CHECK(outcome.channels[0].failed_attempts == 11); // 1 + max_retries
        CHECK(outcome.channels[0].task_failure);
        CHECK(outcome.channels[0].alpha_after == expected_alpha[step_no]);
        if (step_no < 3) {
            CHECK(outcome.switch_requests.empty());
        } else {
            REQUIRE(outcome.switch_requests.size() == 1);
            CHECK(outcome.switch_requests[0] == "c3");
        }
    }
}

TEST_CASE("the secondary takes over a failed primary within the step") {
    DagSnapshot d1 = make_redoing_dag();
    DagSnapshot d2 = inject(d1, make_reconfiguration_subgraph("c3"), "c3");
    AlphaStates alpha;
    aft::alpha::AlphaConfig cfg;

    StepOutcome outcome = execute_step(
        d2, faults_on("c3", aft::fault::FaultClass::permanent), alpha, cfg);
    CHECK(outcome.success);
    REQUIRE(outcome.channels.size() == 1);
    CHECK(outcome.channels[0].channel == "c3");
    CHECK(outcome.channels[0].takeover);
    CHECK_FALSE(outcome.channels[0].task_failure);

    // A schedule that also targets the secondary by id defeats the takeover.
    std::vector<aft::fault::ActiveFault> both = {
        {"c3", aft::fault::FaultClass::permanent},
        {"c3.2", aft::fault::FaultClass::permanent},
    };
    StepOutcome lost = execute_step(d2, both, alpha, cfg);
    CHECK_FALSE(lost.success);
    CHECK(lost.channels[0].task_failure);
    CHECK(lost.channels[0].failed_attempts == 2);
}

TEST_CASE("transient faults with decay-sized gaps never latch") {
    DagSnapshot d1 = make_redoing_dag();
    AlphaStates alpha;
    aft::alpha::AlphaConfig cfg;
    std::vector<aft::fault::ActiveFault> none;
    auto hit = faults_on("c3", aft::fault::FaultClass::transient);

    for (int64_t t = 0; t < 5000; ++t) {
        StepOutcome outcome = execute_step(d1, t % 5 == 0 ? hit : none, alpha, cfg);
        CHECK(outcome.success);
        CHECK(outcome.switch_requests.empty());
    }
    CHECK_FALSE(alpha.at("c3").latched);
}

TEST_CASE("assess_and_switch reconfigures once and records the rebinding") {
    aft::assumption::Registry registry;
    for (aft::assumption::Assumption& a : environment_assumptions())
        registry.register_assumption(std::move(a));

    DagSnapshot dag = make_redoing_dag();
    std::set<std::string> switched;

    SwitchResult first = assess_and_switch(dag, switched, "c3", &registry, 13);
    CHECK(first.switched);
    CHECK(first.dag.contains("c3.1"));
    CHECK(first.dag.contains("c3.2"));
    CHECK_FALSE(first.dag.contains("c3"));

    REQUIRE(registry.clash_log().size() == 1); // e1 broke; e2 matches the truth
    CHECK(registry.clash_log()[0].assumption_id == "e1");
    CHECK(registry.lookup("e2").observed.has_value());
    CHECK_FALSE(registry.lookup("e2").clashes());

    SwitchResult again = assess_and_switch(first.dag, switched, "c3", &registry, 14);
    CHECK_FALSE(again.switched);
    CHECK(registry.clash_log().size() == 1);
}

TEST_CASE("redo attempts never exceed the configured budget") {
    aft::SplitMix64 rng(5);
    aft::alpha::AlphaConfig cfg;
    for (int max_retries : {1, 3, 10}) {
        DagSnapshot d1 = make_redoing_dag("c3", max_retries);
        AlphaStates alpha;
        for (int t = 0; t < 200; ++t) {
            std::vector<aft::fault::ActiveFault> faults;
            switch (rng.next_below(3)) {
            case 0: break;
            case 1: faults = faults_on("c3", aft::fault::FaultClass::transient); break;
            default: faults = faults_on("c3", aft::fault::FaultClass::permanent); break;
            }
            StepOutcome outcome = execute_step(d1, faults, alpha, cfg);
            for (const ChannelReport& ch : outcome.channels)
                CHECK(ch.failed_attempts <= 1 + max_retries);
        }
    }
}

TEST_CASE("environment assumptions carry the three expected ids") {
    auto assumptions = environment_assumptions();
    REQUIRE(assumptions.size() == 3);
    CHECK(assumptions[0].id == "e0");
    CHECK(assumptions[1].id == "e1");
    CHECK(assumptions[2].id == "e2");
    CHECK(assumptions[1].assumed == aft::assumption::ValueLiteral::text("transient"));
    CHECK(assumptions[2].assumed == aft::assumption::ValueLiteral::text("permanent"));
}

TEST_CASE("base_id strips exactly one version suffix") {
    CHECK(base_id("c3.1") == "c3");
    CHECK(base_id("c3") == "c3");
    CHECK(base_id(".1") == ".1");
    CHECK(base_id("c3.") == "c3.");
    CHECK(base_id("a.b.c") == "a.b");
}

TEST_CASE("plain, voter and watchdog nodes produce no channels") {
    DagSnapshot dag({{"a", NodeKind::plain, 10},
                     {"v", NodeKind::voter, 10},
                     {"w", NodeKind::watchdog, 10}},
                    {{"a", "v"}, {"v", "w"}});
    AlphaStates alpha;
    aft::alpha::AlphaConfig cfg;
    StepOutcome outcome = execute_step(dag, faults_on("a", aft::fault::FaultClass::permanent),
                                       alpha, cfg);
    CHECK(outcome.success);
    CHECK(outcome.channels.empty());
    CHECK(alpha.empty());
}

TEST_CASE("dag text round-trips") {
    DagSnapshot d1 = make_redoing_dag("c3", 7);
    DagSnapshot reparsed = parse_dag(serialize_dag(d1));
    CHECK(node_ids(reparsed) == node_ids(d1));
    CHECK(edge_set(reparsed) == edge_set(d1));
    CHECK(reparsed.node("c3").kind == NodeKind::redoing_wrapper);
    CHECK(reparsed.node("c3").max_retries == 7);
}

TEST_CASE("dag parse errors name their line") {
    try {
        parse_dag("a: plain\nb: gizmo\n");
        FAIL("expected a parse error");
    } catch (const aft::ParseError& err) {
        CHECK(err.line() == 2);
    }
    CHECK_THROWS_AS(parse_dag("a plain\n"), aft::ParseError);
    CHECK_THROWS_AS(parse_dag("a: plain max_retries=\n"), aft::ParseError);
    CHECK_THROWS_AS(parse_dag("a: plain shiny=1\n"), aft::ParseError);
    CHECK_THROWS_AS(parse_dag("a: plain\n -> a\n"), aft::ParseError);
    CHECK_THROWS_AS(parse_dag("a: plain\nb: plain\na -> b\nb -> a\n"), aft::ConfigError);
}
