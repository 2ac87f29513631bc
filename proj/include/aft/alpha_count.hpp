#pragma once

#include "aft/errors.hpp"

namespace aft::alpha {

// Count-and-threshold discriminator: each monitored channel accumulates one
// unit of evidence per error step and decays by `decay` on quiet steps. Once
// the score crosses `threshold` the channel is classified
// permanent_or_intermittent and stays there for the rest of the run.
struct AlphaConfig {
    double decay = 0.5;     // K in [0,1]; K=1 means the score never falls
    double threshold = 3.0; // T > 0
    bool strict = true;     // latch on alpha > T (false: alpha >= T)

    void validate() const {
        if (decay < 0.0 || decay > 1.0)
            throw ConfigError("alpha decay must be in [0,1]");
        if (threshold <= 0.0)
            throw ConfigError("alpha threshold must be > 0");
    }
};

enum class Classification { benign, permanent_or_intermittent };

struct AlphaCountState {
    double alpha = 0.0;
    bool latched = false;

    Classification classification() const {
        return latched ? Classification::permanent_or_intermittent : Classification::benign;
    }
};

// Pure transition; the caller owns the state.
inline AlphaCountState step(AlphaCountState s, const AlphaConfig& cfg, bool error_observed) {
    s.alpha = error_observed ? s.alpha + 1.0 : s.alpha * cfg.decay;
    bool crossed = cfg.strict ? s.alpha > cfg.threshold : s.alpha >= cfg.threshold;
    if (crossed)
        s.latched = true; // absorbing
    return s;
}

inline AlphaCountState reset(AlphaCountState) {
    return AlphaCountState{};
}

} // namespace aft::alpha
