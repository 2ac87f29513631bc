#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace aft::fault {

enum class FaultClass { transient, intermittent, permanent };

std::string to_string(FaultClass cls);
FaultClass fault_class_from(std::string_view name);

// One injection: a fault of `cls` on `target` starting at step `t`.
// duration and period only matter for intermittent faults, which recur every
// `period` steps inside the window [t, t + duration).
struct ScheduleEntry {
    int64_t t = 0;
    std::string target;
    FaultClass cls = FaultClass::transient;
    int64_t duration = 1;
    int64_t period = 2;
};

// True when the entry injects a fault at step `now`.
bool entry_active_at(const ScheduleEntry& entry, int64_t now);

struct ActiveFault {
    std::string target;
    FaultClass cls = FaultClass::transient;

    friend auto operator<=>(const ActiveFault&, const ActiveFault&) = default;
};

// Immutable, sorted-by-onset injection plan. The seed records which generator
// run produced it (0 for hand-written schedules).
class InjectionSchedule {
public:
    InjectionSchedule() = default;
    InjectionSchedule(std::vector<ScheduleEntry> entries, uint64_t seed);

    const std::vector<ScheduleEntry>& entries() const { return entries_; }
    uint64_t seed() const { return seed_; }

private:
    std::vector<ScheduleEntry> entries_;
    uint64_t seed_ = 0;
};

// Every fault active at step t, deduplicated and sorted. Scans the whole
// entry list; use FaultCursor when sweeping a long horizon.
std::vector<ActiveFault> faults_at(const InjectionSchedule& schedule, int64_t t);

// Forward-only view over a schedule for step loops: advance() must be called
// with non-decreasing t and answers each step in amortized O(active + new).
class FaultCursor {
public:
    explicit FaultCursor(const InjectionSchedule& schedule);

    std::vector<ActiveFault> advance(int64_t t);

private:
    const InjectionSchedule* schedule_;
    std::size_t next_ = 0;
    int64_t last_t_ = -1;
    std::vector<const ScheduleEntry*> windowed_;
    std::vector<const ScheduleEntry*> permanent_;
};

// Deterministic burst generator: burst_rate is the expected fraction of steps
// covered by bursts, so outside a burst each step starts one with probability
// burst_rate / burst_len. A burst pins burst_len consecutive transient faults
// on a single target drawn uniformly from {prefix0 .. prefix<pool-1>}; bursts
// never overlap.
InjectionSchedule burst_profile(uint64_t seed, int64_t length, double burst_rate,
                                int64_t burst_len, int target_pool = 9,
                                const std::string& target_prefix = "r");

// Text format, one entry per line: `t,target,class[,duration[,period]]`.
// `#` starts a comment; blank lines are skipped.
InjectionSchedule parse_schedule(const std::string& text, uint64_t seed = 0);
std::string serialize_schedule(const InjectionSchedule& schedule);

} // namespace aft::fault
