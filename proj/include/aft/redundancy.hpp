#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "aft/assumption.hpp"
#include "aft/fault_model.hpp"
#include "aft/voting.hpp"

namespace aft::redundancy {

// Raise/lower rules for the replica farm. Raising reacts to a critically low
// distance-to-failure; lowering waits for calm_window consecutive calm rounds
// (calm = dtof within calm_margin of consensus, consensus itself by default).
struct RedundancyPolicy {
    int n_min = 3;
    int n_max = 9;
    int raise_threshold = 1;
    int64_t calm_window = 1000;
    int step = 2;
    int calm_margin = 0;

    void validate() const;
    bool calm(const voting::RoundSummary& round) const {
        return round.majority &&
               round.distance >= voting::ceil_half(round.n) - calm_margin;
    }
};

enum class RoundEvent { none, raise, lower, raise_blocked };

std::string to_string(RoundEvent event);
RoundEvent round_event_from(std::string_view name);

struct Transition {
    int64_t t = 0;
    int n = 0; // replica count after the change
};

struct ControllerState {
    int n = 3;
    int64_t calm_streak = 0;
    std::vector<Transition> history;
};

// One controller decision per voting round; at most one change of n. The
// round must have been played with the controller's current replica count.
RoundEvent react(ControllerState& state, const RedundancyPolicy& policy,
                 const voting::RoundSummary& round, int64_t t);

struct RoundRecord {
    int64_t t = 0;
    int n = 0; // replica count the round was played with
    int m = 0;
    int distance = 0;
    RoundEvent event = RoundEvent::none;
};

struct ExperimentResult {
    std::vector<RoundRecord> trace;
    std::map<int, int64_t> histogram; // replica count -> rounds played at it
    ControllerState state;
    int64_t no_majority_rounds = 0;
};

// Correct replicas vote 0; a replica whose id (prefix + index) is under an
// active fault votes its index + 1, so corrupted votes never agree with each
// other and can never form a majority of their own.
std::vector<int64_t> replica_votes(int n, const std::vector<fault::ActiveFault>& faults,
                                   const std::string& prefix = "r");

// Plays `length` voting rounds against the schedule, starting at n_min.
// When a registry is given, a run-bound "redundancy_degree" assumption
// (assumed n_min) is registered and re-observed on every transition.
ExperimentResult run_experiment(const fault::InjectionSchedule& schedule,
                                const RedundancyPolicy& policy, int64_t length,
                                assumption::Registry* registry = nullptr);

std::string trace_csv(const std::vector<RoundRecord>& trace);
std::vector<RoundRecord> parse_trace_csv(const std::string& text);
std::string histogram_csv(const std::map<int, int64_t>& histogram);

// Independent re-derivation of the raise/lower protocol over a finished
// trace; throws Error naming the first offending row. Checks that every
// lower sits on exactly calm_window calm rounds, every raise on a round at
// or below raise_threshold, and that n never moves without a logged event.
void validate_hysteresis(const std::vector<RoundRecord>& trace,
                         const RedundancyPolicy& policy);

} // namespace aft::redundancy
