#include "aft/assumption.hpp"

#include "aft/textio.hpp"

namespace aft::assumption {

const char* to_string(BindingTime b) {
    switch (b) {
        case BindingTime::design: return "design";
        case BindingTime::compile: return "compile";
        case BindingTime::deploy: return "deploy";
        case BindingTime::run: return "run";
    }
    return "?";
}

const char* to_string(Syndrome s) {
    switch (s) {
        case Syndrome::Horning: return "Horning";
        case Syndrome::HiddenIntelligence: return "HiddenIntelligence";
        case Syndrome::Boulding: return "Boulding";
    }
    return "?";
}

std::string ValueLiteral::render() const {
    struct Visitor {
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(std::int64_t i) const { return std::to_string(i); }
        std::string operator()(double d) const { return format_double(d); }
    };
    return std::visit(Visitor{}, value_);
}

const std::string& Registry::register_assumption(Assumption a) {
    if (a.id.empty())
        throw ConfigError("assumption id must not be empty");
    auto [it, inserted] = by_id_.emplace(a.id, std::move(a));
    if (!inserted)
        throw ConfigError("duplicate assumption id '" + it->first + "'");
    return it->first;
}

const Assumption& Registry::lookup(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end())
        throw ConfigError("unknown assumption id '" + id + "'");
    return it->second;
}

std::optional<ClashRecord> Registry::observe(const std::string& id, const ValueLiteral& value,
                                             Step sim_time) {
    auto it = by_id_.find(id);
    if (it == by_id_.end())
        throw ConfigError("unknown assumption id '" + id + "'");
    if (sim_time < 0)
        throw ConfigError("sim_time must be non-negative");
    if (!clashes_.empty() && sim_time < clashes_.back().sim_time)
        throw ConfigError("sim_time runs backwards in clash log (got " +
                          std::to_string(sim_time) + " after " +
                          std::to_string(clashes_.back().sim_time) + ")");

    Assumption& a = it->second;
    a.observed = value;
    if (value == a.assumed)
        return std::nullopt;

    std::string key = id + "\x1f" + std::to_string(sim_time) + "\x1f" + value.render();
    if (!seen_clash_keys_.insert(key).second)
        return std::nullopt; // same (id, sim_time, value) already logged

    ClashRecord rec{id, a.assumed, value, sim_time, false};
    clashes_.push_back(rec);
    return rec;
}

void Registry::mark_handled(std::size_t clash_index) {
    if (clash_index >= clashes_.size())
        throw ConfigError("clash index out of range");
    clashes_[clash_index].handled = true;
}

std::string Registry::clash_log_csv() const {
    std::string out = "sim_time,assumption_id,assumed,observed\n";
    for (const auto& c : clashes_) {
        out += std::to_string(c.sim_time);
        out += ',';
        out += csv_field(c.assumption_id);
        out += ',';
        out += csv_field(c.assumed.render());
        out += ',';
        out += csv_field(c.observed.render());
        out += '\n';
    }
    return out;
}

} // namespace aft::assumption
