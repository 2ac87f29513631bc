#include "aft/redundancy.hpp"

#include <algorithm>

#include "aft/errors.hpp"
#include "aft/textio.hpp"

namespace aft::redundancy {

void RedundancyPolicy::validate() const {
    if (n_min < 1 || n_min % 2 == 0 || n_max % 2 == 0)
        throw ConfigError("n_min and n_max must be odd and positive");
    if (n_min > n_max)
        throw ConfigError("n_min must not exceed n_max");
    if (step < 2 || step % 2 != 0)
        throw ConfigError("step must be a positive even integer");
    if (calm_window < 1)
        throw ConfigError("calm_window must be >= 1");
    if (raise_threshold < 0 || calm_margin < 0)
        throw ConfigError("raise_threshold and calm_margin must be >= 0");
    // A round must never be raise-eligible and calm at once, or the two
    // rules would contend for the single per-round transition.
    if (raise_threshold >= voting::ceil_half(n_min) - calm_margin)
        throw ConfigError("raise_threshold must stay below the calm bar at n_min");
}

std::string to_string(RoundEvent event) {
    switch (event) {
    case RoundEvent::none: return "";
    case RoundEvent::raise: return "raise";
    case RoundEvent::lower: return "lower";
    case RoundEvent::raise_blocked: return "raise_blocked";
    }
    return "?";
}

RoundEvent round_event_from(std::string_view name) {
    if (name.empty()) return RoundEvent::none;
    if (name == "raise") return RoundEvent::raise;
    if (name == "lower") return RoundEvent::lower;
    if (name == "raise_blocked") return RoundEvent::raise_blocked;
    throw ParseError("unknown round event '" + std::string(name) + "'");
}

RoundEvent react(ControllerState& state, const RedundancyPolicy& policy,
                 const voting::RoundSummary& round, int64_t t) {
    if (round.n != state.n)
        throw ConfigError("round played with n=" + std::to_string(round.n) +
                          " but the controller holds n=" + std::to_string(state.n));

    if (round.distance <= policy.raise_threshold) {
        state.calm_streak = 0;
        if (state.n < policy.n_max) {
            state.n += policy.step;
            state.history.push_back({t, state.n});
            return RoundEvent::raise;
        }
        return RoundEvent::raise_blocked;
    }
    if (policy.calm(round)) {
        ++state.calm_streak;
        if (state.calm_streak == policy.calm_window && state.n > policy.n_min) {
            state.n -= policy.step;
            state.calm_streak = 0;
            state.history.push_back({t, state.n});
            return RoundEvent::lower;
        }
        return RoundEvent::none;
    }
    state.calm_streak = 0;
    return RoundEvent::none;
}

std::vector<int64_t> replica_votes(int n, const std::vector<fault::ActiveFault>& faults,
                                   const std::string& prefix) {
    std::vector<int64_t> votes(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        std::string id = prefix + std::to_string(i);
        bool hit = std::any_of(faults.begin(), faults.end(),
                               [&](const fault::ActiveFault& f) { return f.target == id; });
        if (hit)
            votes[static_cast<std::size_t>(i)] = i + 1;
    }
    return votes;
}

ExperimentResult run_experiment(const fault::InjectionSchedule& schedule,
                                const RedundancyPolicy& policy, int64_t length,
                                assumption::Registry* registry) {
    policy.validate();
    if (length <= 0)
        throw ConfigError("experiment length must be > 0");

    if (registry && !registry->contains("redundancy_degree")) {
        registry->register_assumption({"redundancy_degree",
                                       "replica count the farm is dimensioned for",
                                       assumption::BindingTime::run,
                                       assumption::ValueLiteral::integer(policy.n_min),
                                       std::nullopt, std::nullopt});
    }

    ExperimentResult result;
    result.state.n = policy.n_min;
    for (int r = policy.n_min; r <= policy.n_max; r += policy.step)
        result.histogram[r] = 0;
    result.trace.reserve(static_cast<std::size_t>(length));

    fault::FaultCursor cursor(schedule);
    for (int64_t t = 0; t < length; ++t) {
        std::vector<fault::ActiveFault> faults = cursor.advance(t);
        int n_round = result.state.n;
        auto round = voting::vote(replica_votes(n_round, faults));
        voting::RoundSummary summary{t, round.n, round.m, round.verdict.has_value(),
                                     round.distance};

        ++result.histogram[n_round];
        if (!summary.majority)
            ++result.no_majority_rounds;

        RoundEvent event = react(result.state, policy, summary, t);
        if (registry && result.state.n != n_round)
            registry->observe("redundancy_degree",
                              assumption::ValueLiteral::integer(result.state.n), t);
        result.trace.push_back({t, n_round, summary.m, summary.distance, event});
    }
    return result;
}

std::string trace_csv(const std::vector<RoundRecord>& trace) {
    std::string out = "t,n,m,dtof,event\n";
    for (const RoundRecord& row : trace) {
        out += std::to_string(row.t);
        out += ',';
        out += std::to_string(row.n);
        out += ',';
        out += std::to_string(row.m);
        out += ',';
        out += std::to_string(row.distance);
        out += ',';
        out += to_string(row.event);
        out += '\n';
    }
    return out;
}

std::vector<RoundRecord> parse_trace_csv(const std::string& text) {
    std::vector<RoundRecord> trace;
    int line_no = 0;
    for (const std::string& raw : split(text, '\n')) {
        ++line_no;
        std::string_view line = trim(raw);
        if (line.empty())
            continue;
        if (line_no == 1) {
            if (line != "t,n,m,dtof,event")
                throw ParseError("unexpected trace header '" + std::string(line) + "'", line_no);
            continue;
        }
        std::vector<std::string> fields = split(line, ',');
        if (fields.size() != 5)
            throw ParseError("expected t,n,m,dtof,event", line_no);
        try {
            RoundRecord row;
            row.t = parse_int(fields[0], "t");
            row.n = static_cast<int>(parse_int(fields[1], "n"));
            row.m = static_cast<int>(parse_int(fields[2], "m"));
            row.distance = static_cast<int>(parse_int(fields[3], "dtof"));
            row.event = round_event_from(trim(fields[4]));
            trace.push_back(row);
        } catch (const Error& err) {
            throw ParseError(err.what(), line_no);
        }
    }
    return trace;
}

std::string histogram_csv(const std::map<int, int64_t>& histogram) {
    std::string out = "r,steps\n";
    for (const auto& [r, steps] : histogram) {
        out += std::to_string(r);
        out += ',';
        out += std::to_string(steps);
        out += '\n';
    }
    return out;
}

namespace {

[[noreturn]] void violation(const RoundRecord& row, const std::string& what) {
    throw Error("hysteresis violation at t=" + std::to_string(row.t) + ": " + what);
}

} // namespace

void validate_hysteresis(const std::vector<RoundRecord>& trace,
                         const RedundancyPolicy& policy) {
    policy.validate();
    if (trace.empty())
        return;

    int expected_n = trace.front().n;
    int64_t streak = 0;
    for (const RoundRecord& row : trace) {
        if (row.n != expected_n)
            violation(row, "n=" + std::to_string(row.n) + " but the protocol implies " +
                               std::to_string(expected_n));
        if (row.n < policy.n_min || row.n > policy.n_max || row.n % 2 == 0)
            violation(row, "replica count out of policy range");

        // Cross-check the dissent count against the distance column.
        bool majority = row.distance > 0;
        if (majority) {
            if (row.m != voting::ceil_half(row.n) - row.distance)
                violation(row, "m and dtof are inconsistent");
            if (row.m < 0 || 2 * row.m >= row.n)
                violation(row, "majority row with a majority-sized dissent");
        } else if (row.m < voting::ceil_half(row.n) || row.m > row.n) {
            violation(row, "no-majority row with a winnable dissent count");
        }

        voting::RoundSummary summary{row.t, row.n, row.m, majority, row.distance};
        bool raise_eligible = row.distance <= policy.raise_threshold;
        bool calm = policy.calm(summary);

        switch (row.event) {
        case RoundEvent::raise:
            if (!raise_eligible)
                violation(row, "raise without dtof <= " + std::to_string(policy.raise_threshold));
            if (expected_n >= policy.n_max)
                violation(row, "raise beyond n_max");
            expected_n += policy.step;
            streak = 0;
            break;
        case RoundEvent::raise_blocked:
            if (!raise_eligible)
                violation(row, "raise_blocked without a raise trigger");
            if (expected_n != policy.n_max)
                violation(row, "raise_blocked away from n_max");
            streak = 0;
            break;
        case RoundEvent::lower:
            if (raise_eligible)
                violation(row, "lower on a raise-eligible round");
            if (!calm)
                violation(row, "lower on a non-calm round");
            ++streak;
            if (streak != policy.calm_window)
                violation(row, "lower after " + std::to_string(streak) +
                                   " calm rounds instead of " +
                                   std::to_string(policy.calm_window));
            if (expected_n <= policy.n_min)
                violation(row, "lower below n_min");
            expected_n -= policy.step;
            streak = 0;
            break;
        case RoundEvent::none:
            if (raise_eligible)
                violation(row, "missing raise event on a raise-eligible round");
            if (calm) {
                ++streak;
                if (streak == policy.calm_window && expected_n > policy.n_min)
                    violation(row, "missing lower event after a full calm window");
            } else {
                streak = 0;
            }
            break;
        }
    }
}

} // namespace aft::redundancy
