#pragma once

#include <cstddef>
#include <functional>

#include "rgf/training_state.hpp"

namespace rgf {

struct CorrectionConfig {
    double eta = 0.5;           // Newton step damping, (0, 1]
    int passes = 10;            // sweeps per correction round
    std::size_t interval = 100; // new leaves between rounds
    double tolerance = 1e-6;    // stop when a sweep changes Q by less than this, relatively

    void validate() const;
};

struct CorrectionStats {
    int sweeps = 0;
    std::size_t updates = 0;        // coordinates that moved
    std::size_t skipped = 0;        // non-positive curvature or no descent found
    std::size_t backtracked = 0;    // steps that had to be shortened
    double objective_before = 0.0;
    double objective_after = 0.0;
};

/// Coordinate descent over every leaf weight, trees in creation order and
/// leaves in creation order, each step
///   w_v += eta * (-dQ/d delta) / (d^2Q/d delta^2)
/// with the loss part summed over the instances reaching v and the penalty
/// part from the tree's regularizer cache (scaled by `lambda`). A step that
/// would raise Q is halved until it does not (at most 30 times).
/// `after_update`, when set, runs after every coordinate that moved.
using WeightUpdateHook = std::function<void(const TrainingState&)>;
CorrectionStats correct_weights(TrainingState& state, const CorrectionConfig& config, double lambda,
                                const WeightUpdateHook& after_update = {});

/// True once `leaves_added` new leaves have accumulated since the last round.
inline bool should_correct(std::size_t leaves_added, const CorrectionConfig& config) {
    return leaves_added >= config.interval;
}

}  // namespace rgf
