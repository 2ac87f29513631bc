#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "aft/errors.hpp"

namespace aft::probe {

// One memory bank as reported by the inventory listing, units normalized.
struct MemoryModuleDescriptor {
    std::string slot;
    std::string description;
    std::string vendor;
    std::string serial;
    int64_t size_bytes = 0;
    int64_t width_bits = 0;
    int64_t clock_hz = 0;
};

// Inventory grammar: a `*-memory` header whose indented `*-bank:<n>` blocks
// hold `key: value` lines. Recognized keys: description, vendor, serial,
// slot, size, width, clock; unknown keys are ignored. size/width/clock are
// required per bank.
std::vector<MemoryModuleDescriptor> parse_inventory(const std::string& text);
std::string serialize_inventory(const std::vector<MemoryModuleDescriptor>& banks);

// Failure-semantics classes a memory bank may be assumed to follow. Tolerance
// is an explicit relation on access methods, never an ordering of these ids.
enum class FailureClass { f0, f1, f2, f3, f4 };

std::string to_string(FailureClass cls);
FailureClass failure_class_from(std::string_view name);
const char* failure_class_text(FailureClass cls);
int severity_rank(FailureClass cls);

// One knowledge-base rule. Patterns are literal text with `*` wildcards;
// which pattern fields are set decides the rule's specificity:
// serial (3) > vendor+description (2) > description (1).
struct KbRecord {
    std::string serial_pattern;
    std::string vendor_pattern;
    std::string description_pattern;
    FailureClass behavior = FailureClass::f4;

    int specificity() const;
    bool matches(const MemoryModuleDescriptor& module) const;
};

struct KnowledgeBase {
    std::vector<KbRecord> records; // file order breaks specificity ties
};

bool glob_match(std::string_view pattern, std::string_view text);

// Line format, `#` comments allowed:
//   serial=F504F679 -> f3
//   vendor=CE00*&description=DIMM DDR* -> f1
//   description=DIMM DDR Synchronous* -> f1
KnowledgeBase parse_kb(const std::string& text);
std::string serialize_kb(const KnowledgeBase& kb);

// Most specific matching rule wins; earlier rules win ties. A miss yields
// the pessimistic fallback so unknown hardware gets the most protective
// method rather than a silent gap.
FailureClass assess(const KnowledgeBase& kb, const MemoryModuleDescriptor& module,
                    FailureClass fallback = FailureClass::f4);

struct AccessMethod {
    std::string id;
    double cost = 0.0;
    std::set<FailureClass> tolerates;
};

// Raised when no catalog method tolerates the assessed behavior; the CLI
// maps it to exit code 2.
class NoToleratingMethod : public Error {
public:
    NoToleratingMethod(FailureClass behavior, const std::string& context = "");
    FailureClass behavior() const { return behavior_; }

private:
    FailureClass behavior_;
};

// Catalog lines: `id,cost,class[,class...]`, `#` comments allowed. A method
// named M<d> must tolerate f<d>; M0 must tolerate f0 and nothing else.
std::vector<AccessMethod> parse_methods(const std::string& text);
std::string serialize_methods(const std::vector<AccessMethod>& methods);

// Cheapest method tolerating `behavior`; cost ties break on lexicographic id.
const AccessMethod& select_method(const std::vector<AccessMethod>& methods,
                                  FailureClass behavior);

struct ProbeRow {
    std::string slot;
    FailureClass behavior = FailureClass::f4;
    std::string method;
    double cost = 0.0;
};

struct ProbeReport {
    std::vector<ProbeRow> rows; // banks with a selected method, inventory order
    std::vector<std::pair<std::string, FailureClass>> unservable; // slot, behavior
};

ProbeReport run_probe(const std::vector<MemoryModuleDescriptor>& banks,
                      const KnowledgeBase& kb, const std::vector<AccessMethod>& methods,
                      FailureClass fallback = FailureClass::f4);

// CSV export: slot,assumed_behavior,selected_method,cost
std::string report_csv(const ProbeReport& report);

} // namespace aft::probe
