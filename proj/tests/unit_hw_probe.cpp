#include <doctest.h>

#include <string>
#include <vector>

#include "aft/hw_probe.hpp"
#include "aft/rng.hpp"
#include "aft/scenario.hpp"
#include "test_util.hpp"

using namespace aft::probe;

namespace {

std::string sample_inventory() {
    return aft::sim::read_file(testutil::source_root() / "data" / "sample_inventory.txt");
}

std::string sample_kb() {
    return aft::sim::read_file(testutil::source_root() / "data" / "sample_kb.txt");
}

std::string sample_methods() {
    return aft::sim::read_file(testutil::source_root() / "data" / "sample_methods.txt");
}

// Independent specificity scan: the highest-specificity match wins, earlier
// records win ties, a miss falls back.
FailureClass assess_oracle(const KnowledgeBase& kb, const MemoryModuleDescriptor& module,
                           FailureClass fallback) {
    const KbRecord* best = nullptr;
    for (const KbRecord& record : kb.records) {
        if (!record.matches(module))
            continue;
        if (!best || record.specificity() > best->specificity())
            best = &record;
    }
    return best ? best->behavior : fallback;
}

// Independent selection scan: cheapest tolerating method, id breaks ties.
const AccessMethod* select_oracle(const std::vector<AccessMethod>& methods,
                                  FailureClass behavior) {
    const AccessMethod* best = nullptr;
    for (const AccessMethod& method : methods) {
        if (!method.tolerates.count(behavior))
            continue;
        if (!best || method.cost < best->cost ||
            (method.cost == best->cost && method.id < best->id))
            best = &method;
    }
    return best;
}

} // namespace

TEST_CASE("the sample inventory yields two fully populated banks") {
    std::vector<MemoryModuleDescriptor> banks = parse_inventory(sample_inventory());
    REQUIRE(banks.size() == 2);

    CHECK(banks[0].slot == "DIMM_A");
    CHECK(banks[0].description == "DIMM DDR Synchronous 533 MHz (1.9 ns)");
    CHECK(banks[0].vendor == "CE00000000000000");
    CHECK(banks[0].serial == "F504F679");
    CHECK(banks[0].size_bytes == 1073741824);
    CHECK(banks[0].width_bits == 64);
    CHECK(banks[0].clock_hz == 533000000);

    CHECK(banks[1].slot == "DIMM_B");
    CHECK(banks[1].description == "DIMM DDR Synchronous 667 MHz (1.5 ns)");
    CHECK(banks[1].serial == "F33DD2FD");
    CHECK(banks[1].size_bytes == 536870912);
    CHECK(banks[1].width_bits == 64);
    CHECK(banks[1].clock_hz == 667000000);
}

TEST_CASE("only bank blocks open descriptors") {
    CHECK(parse_inventory("").empty());
    // The enclosing *-memory section carries size/slot lines of its own;
    // they belong to no bank and are skipped.
    CHECK(parse_inventory("  *-memory\n     size: 1536MiB\n     slot: mainboard\n").empty());
    CHECK(parse_inventory("  *-cpu\n     product: X\n").empty());

    std::vector<MemoryModuleDescriptor> banks = parse_inventory(
        "*-bank:0\n size: 1GiB\n width: 64 bits\n clock: 533MHz\n"
        "*-cache\n size: 1MiB\n");
    REQUIRE(banks.size() == 1);
    CHECK(banks[0].size_bytes == (int64_t{1} << 30));
}

TEST_CASE("a bank missing a required field names its header line") {
    try {
        parse_inventory("*-memory\n*-bank:0\n size: 1GiB\n width: 64 bits\n");
        FAIL("expected a parse error");
    } catch (const aft::ParseError& err) {
        CHECK(err.line() == 2);
        CHECK(std::string(err.what()).find("clock") != std::string::npos);
    }
}

TEST_CASE("unknown keys are ignored, garbage lines are not") {
    std::vector<MemoryModuleDescriptor> banks = parse_inventory(
        "*-bank:0\n physical id: 0\n oddkey: 3\n size: 2MiB\n width: 8 bits\n clock: 1kHz\n");
    REQUIRE(banks.size() == 1);
    CHECK(banks[0].size_bytes == 2 * 1024 * 1024);
    CHECK(banks[0].clock_hz == 1000);

    CHECK_THROWS_AS(parse_inventory("*-bank:0\n justtext\n"), aft::ParseError);
    CHECK_THROWS_AS(parse_inventory("*-bank:0\n size: 0MiB\n"), aft::ParseError);
    CHECK_THROWS_AS(parse_inventory("*-bank:0\n size: 1XiB\n"), aft::ParseError);
    CHECK_THROWS_AS(parse_inventory("*-bank:0\n size: lots\n"), aft::ParseError);
    CHECK_THROWS_AS(parse_inventory("*-bank:0\n width: 64 parsecs\n"), aft::ParseError);
    CHECK_THROWS_AS(parse_inventory("*-bank:0\n clock: 533MiB\n"), aft::ParseError);
}

TEST_CASE("inventory text round-trips through the largest exact unit") {
    std::vector<MemoryModuleDescriptor> banks = parse_inventory(sample_inventory());
    std::string text = serialize_inventory(banks);
    CHECK(text.find("size: 1GiB\n") != std::string::npos);
    CHECK(text.find("size: 512MiB\n") != std::string::npos);
    CHECK(text.find("clock: 533MHz\n") != std::string::npos);
    CHECK(text.find("width: 64 bits\n") != std::string::npos);

    std::vector<MemoryModuleDescriptor> reparsed = parse_inventory(text);
    REQUIRE(reparsed.size() == banks.size());
    for (std::size_t i = 0; i < banks.size(); ++i) {
        CHECK(reparsed[i].slot == banks[i].slot);
        CHECK(reparsed[i].serial == banks[i].serial);
        CHECK(reparsed[i].vendor == banks[i].vendor);
        CHECK(reparsed[i].description == banks[i].description);
        CHECK(reparsed[i].size_bytes == banks[i].size_bytes);
        CHECK(reparsed[i].width_bits == banks[i].width_bits);
        CHECK(reparsed[i].clock_hz == banks[i].clock_hz);
    }

    MemoryModuleDescriptor odd;
    odd.size_bytes = 1536 * 1024 * 1024; // divisible by MiB but not GiB
    odd.width_bits = 64;
    odd.clock_hz = 1500;
    std::string odd_text = serialize_inventory({odd});
    CHECK(odd_text.find("size: 1536MiB\n") != std::string::npos);
    CHECK(odd_text.find("clock: 1500Hz\n") != std::string::npos);
    CHECK(parse_inventory(odd_text)[0].size_bytes == odd.size_bytes);
}

TEST_CASE("glob matching handles stars anywhere") {
    CHECK(glob_match("F504F679", "F504F679"));
    CHECK_FALSE(glob_match("F504F679", "F504F678"));
    CHECK(glob_match("*", ""));
    CHECK(glob_match("*", "anything"));
    CHECK(glob_match("DIMM DDR*", "DIMM DDR Synchronous 533 MHz (1.9 ns)"));
    CHECK_FALSE(glob_match("DIMM DDR*", "SODIMM DDR"));
    CHECK(glob_match("*533*", "DIMM DDR Synchronous 533 MHz"));
    CHECK(glob_match("CE*00", "CE00000000000000"));
    CHECK_FALSE(glob_match("CE*01", "CE00000000000000"));
    CHECK(glob_match("a*b*c", "aXXbYYc"));
    CHECK_FALSE(glob_match("a*b*c", "aXXcYYb"));
    CHECK(glob_match("", ""));
    CHECK_FALSE(glob_match("", "x"));
    CHECK(glob_match("**", "x"));
}

TEST_CASE("assessment picks the most specific rule and falls back pessimistically") {
    KnowledgeBase kb = parse_kb(sample_kb());
    REQUIRE(kb.records.size() == 2);
    CHECK(kb.records[0].specificity() == 3);
    CHECK(kb.records[1].specificity() == 1);

    std::vector<MemoryModuleDescriptor> banks = parse_inventory(sample_inventory());
    // DIMM_A matches both rules; the serial rule outranks the description one.
    CHECK(assess(kb, banks[0]) == FailureClass::f3);
    CHECK(assess(kb, banks[0]) == assess_oracle(kb, banks[0], FailureClass::f4));
    CHECK(assess(kb, banks[1]) == FailureClass::f1);

    MemoryModuleDescriptor stranger;
    stranger.serial = "00000000";
    stranger.description = "FLASH NOR";
    CHECK(assess(kb, stranger) == FailureClass::f4);
    CHECK(assess(kb, stranger, FailureClass::f2) == FailureClass::f2);
}

TEST_CASE("equal specificity resolves in file order") {
    KnowledgeBase kb = parse_kb("description=DIMM* -> f1\ndescription=DIMM DDR* -> f2\n");
    MemoryModuleDescriptor module;
    module.description = "DIMM DDR Synchronous";
    CHECK(assess(kb, module) == FailureClass::f1);
    CHECK(assess(kb, module) == assess_oracle(kb, module, FailureClass::f4));
}

TEST_CASE("a vendor rule only fires together with its description pattern") {
    KnowledgeBase kb = parse_kb("vendor=CE00*&description=DIMM DDR* -> f1\n");
    REQUIRE(kb.records.size() == 1);
    CHECK(kb.records[0].specificity() == 2);

    MemoryModuleDescriptor module;
    module.vendor = "CE00000000000000";
    module.description = "DIMM DDR Synchronous";
    CHECK(assess(kb, module) == FailureClass::f1);
    module.description = "FLASH NOR";
    CHECK(assess(kb, module) == FailureClass::f4);
}

TEST_CASE("knowledge-base text round-trips and rejects malformed lines") {
    KnowledgeBase kb = parse_kb(sample_kb());
    KnowledgeBase reparsed = parse_kb(serialize_kb(kb));
    REQUIRE(reparsed.records.size() == kb.records.size());
    for (std::size_t i = 0; i < kb.records.size(); ++i) {
        CHECK(reparsed.records[i].serial_pattern == kb.records[i].serial_pattern);
        CHECK(reparsed.records[i].vendor_pattern == kb.records[i].vendor_pattern);
        CHECK(reparsed.records[i].description_pattern == kb.records[i].description_pattern);
        CHECK(reparsed.records[i].behavior == kb.records[i].behavior);
    }

    CHECK_THROWS_AS(parse_kb("serial=F504F679\n"), aft::ParseError);
    CHECK_THROWS_AS(parse_kb("flavor=X -> f1\n"), aft::ParseError);
    CHECK_THROWS_AS(parse_kb("vendor=CE00* -> f1\n"), aft::ParseError);
    CHECK_THROWS_AS(parse_kb("serial=X -> f9\n"), aft::ParseError);
    try {
        parse_kb("serial=F504F679 -> f3\nserial=X -> banana\n");
        FAIL("expected a parse error");
    } catch (const aft::ParseError& err) {
        CHECK(err.line() == 2);
    }
}

TEST_CASE("the worked catalog serves every behavior but f2") {
    std::vector<AccessMethod> methods = parse_methods(sample_methods());
    REQUIRE(methods.size() == 4);

    CHECK(select_method(methods, FailureClass::f0).id == "M0");
    CHECK(select_method(methods, FailureClass::f1).id == "M1");
    CHECK(select_method(methods, FailureClass::f3).id == "M3");
    CHECK(select_method(methods, FailureClass::f4).id == "M4");

    try {
        select_method(methods, FailureClass::f2);
        FAIL("expected no tolerating method");
    } catch (const NoToleratingMethod& err) {
        CHECK(err.behavior() == FailureClass::f2);
        CHECK(std::string(err.what()) == "no access method tolerates behavior f2");
    }
}

TEST_CASE("catalog parsing enforces the naming contract") {
    CHECK_THROWS_AS(parse_methods("M2,1,f0\n"), aft::ParseError);    // M2 must tolerate f2
    CHECK_THROWS_AS(parse_methods("M0,0,f0,f1\n"), aft::ParseError); // M0 is exactly f0
    CHECK_THROWS_AS(parse_methods("M1,2,f0,f1\nM1,3,f1\n"), aft::ParseError);
    CHECK_THROWS_AS(parse_methods("A,-1,f0\n"), aft::ParseError);
    CHECK_THROWS_AS(parse_methods("A,1\n"), aft::ParseError);
    CHECK_THROWS_AS(parse_methods(",1,f0\n"), aft::ParseError);
    CHECK_THROWS_AS(parse_methods("A,1,f7\n"), aft::ParseError);

    // Ids outside the M<d> shape carry no tolerance obligation.
    std::vector<AccessMethod> methods = parse_methods("ecc,1.5,f1,f3\n");
    REQUIRE(methods.size() == 1);
    CHECK(methods[0].tolerates == std::set<FailureClass>{FailureClass::f1, FailureClass::f3});

    std::vector<AccessMethod> reparsed = parse_methods(serialize_methods(methods));
    CHECK(reparsed[0].id == methods[0].id);
    CHECK(reparsed[0].cost == methods[0].cost);
    CHECK(reparsed[0].tolerates == methods[0].tolerates);
}

TEST_CASE("selection matches a brute-force oracle over random catalogs") {
    CHECK_THROWS_AS(select_method({}, FailureClass::f0), aft::ConfigError);

    const FailureClass classes[] = {FailureClass::f0, FailureClass::f1, FailureClass::f2,
                                    FailureClass::f3, FailureClass::f4};
    const double costs[] = {1, 2, 2, 3, 5}; // duplicates on purpose: ties must break on id
    aft::SplitMix64 rng(21);

    for (int round = 0; round < 1000; ++round) {
        std::vector<AccessMethod> methods;
        int count = 1 + static_cast<int>(rng.next_below(8));
        for (int i = 0; i < count; ++i) {
            AccessMethod method;
            method.id = "K" + std::to_string(i);
            method.cost = costs[rng.next_below(5)];
            while (method.tolerates.empty())
                for (FailureClass cls : classes)
                    if (rng.next_below(2) == 0)
                        method.tolerates.insert(cls);
            methods.push_back(std::move(method));
        }
        FailureClass behavior = classes[rng.next_below(5)];

        const AccessMethod* expected = select_oracle(methods, behavior);
        if (expected) {
            const AccessMethod& got = select_method(methods, behavior);
            CHECK(got.id == expected->id);
            CHECK(got.cost == expected->cost);
        } else {
            CHECK_THROWS_AS(select_method(methods, behavior), NoToleratingMethod);
        }
    }
}

TEST_CASE("the probe report lists selections in inventory order") {
    std::vector<MemoryModuleDescriptor> banks = parse_inventory(sample_inventory());
    KnowledgeBase kb = parse_kb(sample_kb());
    std::vector<AccessMethod> methods = parse_methods(sample_methods());

    ProbeReport report = run_probe(banks, kb, methods);
    CHECK(report.unservable.empty());
    CHECK(report_csv(report) ==
          "slot,assumed_behavior,selected_method,cost\n"
          "DIMM_A,f3,M3,5\n"
          "DIMM_B,f1,M1,2\n");

    KnowledgeBase hostile = parse_kb("serial=F504F679 -> f2\n");
    ProbeReport broken = run_probe(banks, hostile, methods);
    REQUIRE(broken.unservable.size() == 1);
    CHECK(broken.unservable[0].first == "DIMM_A");
    CHECK(broken.unservable[0].second == FailureClass::f2);
    REQUIRE(broken.rows.size() == 1);
    CHECK(broken.rows[0].slot == "DIMM_B"); // fallback f4 is still servable
    CHECK(broken.rows[0].method == "M4");
}

TEST_CASE("failure classes render and rank consistently") {
    const FailureClass classes[] = {FailureClass::f0, FailureClass::f1, FailureClass::f2,
                                    FailureClass::f3, FailureClass::f4};
    int expected_rank = 0;
    for (FailureClass cls : classes) {
        CHECK(failure_class_from(to_string(cls)) == cls);
        CHECK(severity_rank(cls) == expected_rank++);
        CHECK(std::string(failure_class_text(cls)).size() > 0);
    }
    CHECK_THROWS_AS(failure_class_from("f5"), aft::ParseError);
    CHECK_THROWS_AS(failure_class_from(""), aft::ParseError);
}
