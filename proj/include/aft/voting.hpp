#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aft/errors.hpp"
#include "aft/textio.hpp"

namespace aft::voting {

// ceil(n/2) for odd n: the farthest possible distance to failure.
inline int ceil_half(int n) {
    return (n + 1) / 2;
}

// Distance-to-failure of a round with n replicas and m dissenting votes.
// 0 means the round failed (no majority); ceil(n/2) means full consensus.
inline int dtof(int n, int m, bool majority_exists) {
    if (n < 1 || n % 2 == 0)
        throw ConfigError("dtof requires an odd replica count, got " + std::to_string(n));
    if (m < 0 || m > n)
        throw ConfigError("dissent count " + std::to_string(m) + " out of range for n=" + std::to_string(n));
    return majority_exists ? ceil_half(n) - m : 0;
}

// Outcome of one majority-voting round over n replica outputs.
template <typename V>
struct VoteRound {
    int n = 0;
    std::vector<V> votes;
    std::optional<V> verdict; // present iff some value occurs > n/2 times
    int m = 0;                // votes outside the largest bloc
    int distance = 0;         // dtof(n, m, verdict.has_value())
};

// Exact-equality majority vote. Values only need operator==, so blocs are
// counted pairwise; n stays single-digit in every use here.
template <typename V>
VoteRound<V> vote(const std::vector<V>& votes) {
    if (votes.empty() || votes.size() % 2 == 0)
        throw ConfigError("vote requires an odd, non-empty vote list, got " +
                          std::to_string(votes.size()) + " votes");
    const int n = static_cast<int>(votes.size());

    int best_count = 0;
    std::size_t best_index = 0;
    for (std::size_t i = 0; i < votes.size(); ++i) {
        int count = 0;
        for (const V& other : votes)
            if (other == votes[i])
                ++count;
        if (count > best_count) {
            best_count = count;
            best_index = i;
        }
    }

    VoteRound<V> round;
    round.n = n;
    round.votes = votes;
    round.m = n - best_count;
    if (2 * best_count > n)
        round.verdict = votes[best_index];
    round.distance = dtof(n, round.m, round.verdict.has_value());
    return round;
}

// One line of a round trace, kept independent of the vote value type.
struct RoundSummary {
    int64_t t = 0;
    int n = 0;
    int m = 0;
    bool majority = false;
    int distance = 0;
};

inline std::string round_trace_csv(const std::vector<RoundSummary>& rounds) {
    std::string out = "t,n,m,majority,dtof\n";
    for (const RoundSummary& r : rounds) {
        out += std::to_string(r.t);
        out += ',';
        out += std::to_string(r.n);
        out += ',';
        out += std::to_string(r.m);
        out += ',';
        out += r.majority ? '1' : '0';
        out += ',';
        out += std::to_string(r.distance);
        out += '\n';
    }
    return out;
}

} // namespace aft::voting
