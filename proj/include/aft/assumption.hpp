#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "aft/errors.hpp"

namespace aft::assumption {

using Step = std::int64_t;

// Stage at which an assumption variable gets bound to a concrete value.
enum class BindingTime { design, compile, deploy, run };

const char* to_string(BindingTime b);

// Tagged scalar. Comparison is exact: a clash is categorical, never approximate,
// so two decimals clash unless they are bit-equal.
class ValueLiteral {
public:
    static ValueLiteral text(std::string v) { return ValueLiteral(std::move(v)); }
    static ValueLiteral integer(std::int64_t v) { return ValueLiteral(v); }
    static ValueLiteral decimal(double v) { return ValueLiteral(v); }

    bool operator==(const ValueLiteral& other) const { return value_ == other.value_; }
    bool operator!=(const ValueLiteral& other) const { return !(*this == other); }

    // Canonical rendering used in CSV exports and dedup keys.
    std::string render() const;

private:
    explicit ValueLiteral(std::string v) : value_(std::move(v)) {}
    explicit ValueLiteral(std::int64_t v) : value_(v) {}
    explicit ValueLiteral(double v) : value_(v) {}

    std::variant<std::string, std::int64_t, double> value_;
};

// Which development hazard an assumption guards against. Informational only;
// nothing branches on it.
enum class Syndrome { Horning, HiddenIntelligence, Boulding };

const char* to_string(Syndrome s);

struct Assumption {
    std::string id;
    std::string description;
    BindingTime binding = BindingTime::design;
    ValueLiteral assumed = ValueLiteral::text("");
    std::optional<ValueLiteral> observed;
    std::optional<Syndrome> syndrome_tag;

    bool clashes() const { return observed.has_value() && *observed != assumed; }
};

struct ClashRecord {
    std::string assumption_id;
    ValueLiteral assumed = ValueLiteral::text("");
    ValueLiteral observed = ValueLiteral::text("");
    Step sim_time = 0;
    bool handled = false;
};

// Single-writer store of assumption variables plus an append-only clash log.
// Records are immutable once logged; reads are safe to share across threads
// after the writing run finishes.
class Registry {
public:
    // Rejects duplicate ids. Returns the id as the lookup handle.
    const std::string& register_assumption(Assumption a);

    bool contains(const std::string& id) const { return by_id_.count(id) != 0; }
    const Assumption& lookup(const std::string& id) const;

    // Stores the observed truth for `id`; appends (and returns) a ClashRecord
    // iff the value differs from the assumed one. Re-observing the same value
    // at the same sim_time never duplicates a clash. sim_time may not run
    // backwards relative to the clash log.
    std::optional<ClashRecord> observe(const std::string& id, const ValueLiteral& value,
                                       Step sim_time);

    const std::vector<ClashRecord>& clash_log() const { return clashes_; }

    void mark_handled(std::size_t clash_index);

    // CSV export: sim_time,assumption_id,assumed,observed
    std::string clash_log_csv() const;

private:
    std::map<std::string, Assumption> by_id_;
    std::vector<ClashRecord> clashes_;
    std::set<std::string> seen_clash_keys_;
};

} // namespace aft::assumption
