#include "aft/fault_model.hpp"

#include <algorithm>

#include "aft/errors.hpp"
#include "aft/rng.hpp"
#include "aft/textio.hpp"

namespace aft::fault {

std::string to_string(FaultClass cls) {
    switch (cls) {
    case FaultClass::transient: return "transient";
    case FaultClass::intermittent: return "intermittent";
    case FaultClass::permanent: return "permanent";
    }
    return "?";
}

FaultClass fault_class_from(std::string_view name) {
    if (name == "transient")
        return FaultClass::transient;
    if (name == "intermittent")
        return FaultClass::intermittent;
    if (name == "permanent")
        return FaultClass::permanent;
    throw ParseError("unknown fault class '" + std::string(name) +
                     "' (expected transient, intermittent or permanent)");
}

bool entry_active_at(const ScheduleEntry& entry, int64_t now) {
    switch (entry.cls) {
    case FaultClass::transient:
        return now == entry.t;
    case FaultClass::permanent:
        return now >= entry.t;
    case FaultClass::intermittent:
        return now >= entry.t && now < entry.t + entry.duration &&
               (now - entry.t) % entry.period == 0;
    }
    return false;
}

namespace {

void validate_entry(const ScheduleEntry& entry) {
    if (entry.t < 0)
        throw ConfigError("schedule entry has negative onset " + std::to_string(entry.t));
    if (entry.target.empty())
        throw ConfigError("schedule entry has an empty target");
    if (entry.duration < 1)
        throw ConfigError("schedule entry duration must be >= 1");
    if (entry.period < 1)
        throw ConfigError("schedule entry period must be >= 1");
}

void sort_and_dedup(std::vector<ActiveFault>& active) {
    std::sort(active.begin(), active.end());
    active.erase(std::unique(active.begin(), active.end()), active.end());
}

} // namespace

InjectionSchedule::InjectionSchedule(std::vector<ScheduleEntry> entries, uint64_t seed)
    : entries_(std::move(entries)), seed_(seed) {
    for (const ScheduleEntry& entry : entries_)
        validate_entry(entry);
    std::stable_sort(entries_.begin(), entries_.end(),
                     [](const ScheduleEntry& a, const ScheduleEntry& b) { return a.t < b.t; });
}

std::vector<ActiveFault> faults_at(const InjectionSchedule& schedule, int64_t t) {
    if (t < 0)
        throw ConfigError("faults_at requires t >= 0");
    std::vector<ActiveFault> active;
    for (const ScheduleEntry& entry : schedule.entries()) {
        if (entry.t > t)
            break;
        if (entry_active_at(entry, t))
            active.push_back({entry.target, entry.cls});
    }
    sort_and_dedup(active);
    return active;
}

FaultCursor::FaultCursor(const InjectionSchedule& schedule) : schedule_(&schedule) {}

std::vector<ActiveFault> FaultCursor::advance(int64_t t) {
    if (t < 0)
        throw ConfigError("FaultCursor::advance requires t >= 0");
    if (t < last_t_)
        throw ConfigError("FaultCursor::advance went backwards (" + std::to_string(t) +
                          " after " + std::to_string(last_t_) + ")");
    last_t_ = t;

    const std::vector<ScheduleEntry>& entries = schedule_->entries();
    while (next_ < entries.size() && entries[next_].t <= t) {
        const ScheduleEntry& entry = entries[next_++];
        if (entry.cls == FaultClass::permanent)
            permanent_.push_back(&entry);
        else
            windowed_.push_back(&entry);
    }
    std::erase_if(windowed_, [t](const ScheduleEntry* entry) {
        int64_t window = entry->cls == FaultClass::transient ? 1 : entry->duration;
        return entry->t + window <= t;
    });

    std::vector<ActiveFault> active;
    for (const ScheduleEntry* entry : permanent_)
        active.push_back({entry->target, entry->cls});
    for (const ScheduleEntry* entry : windowed_)
        if (entry_active_at(*entry, t))
            active.push_back({entry->target, entry->cls});
    sort_and_dedup(active);
    return active;
}

InjectionSchedule burst_profile(uint64_t seed, int64_t length, double burst_rate,
                                int64_t burst_len, int target_pool,
                                const std::string& target_prefix) {
    if (length <= 0)
        throw ConfigError("burst_profile requires length > 0");
    if (!(burst_rate >= 0.0 && burst_rate <= 1.0))
        throw ConfigError("burst_rate must be in [0,1]");
    if (burst_len < 1)
        throw ConfigError("burst_len must be >= 1");
    if (target_pool < 1)
        throw ConfigError("target_pool must be >= 1");

    SplitMix64 rng(seed);
    double start_prob = burst_rate / static_cast<double>(burst_len);
    std::vector<ScheduleEntry> entries;
    int64_t t = 0;
    while (t < length) {
        if (rng.next_double() < start_prob) {
            std::string target =
                target_prefix + std::to_string(rng.next_below(static_cast<uint64_t>(target_pool)));
            for (int64_t k = 0; k < burst_len && t + k < length; ++k)
                entries.push_back({t + k, target, FaultClass::transient, 1, 2});
            t += burst_len;
        } else {
            ++t;
        }
    }
    return InjectionSchedule(std::move(entries), seed);
}

InjectionSchedule parse_schedule(const std::string& text, uint64_t seed) {
    std::vector<ScheduleEntry> entries;
    int line_no = 0;
    for (const std::string& raw : split(text, '\n')) {
        ++line_no;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;

        std::vector<std::string> fields = split(line, ',');
        if (fields.size() < 3 || fields.size() > 5)
            throw ParseError("expected t,target,class[,duration[,period]]", line_no);
        try {
            ScheduleEntry entry;
            entry.t = parse_int(fields[0], "t");
            entry.target = std::string(trim(fields[1]));
            entry.cls = fault_class_from(trim(fields[2]));
            if (fields.size() >= 4)
                entry.duration = parse_int(fields[3], "duration");
            if (fields.size() == 5)
                entry.period = parse_int(fields[4], "period");
            validate_entry(entry);
            entries.push_back(std::move(entry));
        } catch (const Error& err) {
            throw ParseError(err.what(), line_no);
        }
    }
    return InjectionSchedule(std::move(entries), seed);
}

std::string serialize_schedule(const InjectionSchedule& schedule) {
    std::string out = "# t,target,class[,duration[,period]]\n";
    for (const ScheduleEntry& entry : schedule.entries()) {
        out += std::to_string(entry.t);
        out += ',';
        out += entry.target;
        out += ',';
        out += to_string(entry.cls);
        if (entry.cls == FaultClass::intermittent) {
            out += ',';
            out += std::to_string(entry.duration);
            out += ',';
            out += std::to_string(entry.period);
        }
        out += '\n';
    }
    return out;
}

} // namespace aft::fault
