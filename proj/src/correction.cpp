#include "rgf/correction.hpp"

#include <array>
#include <cmath>

#include "rgf/error.hpp"
#include "rgf/growth.hpp"

namespace rgf {

void CorrectionConfig::validate() const {
    if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("eta must be in (0, 1]");
    if (passes < 0) throw ConfigError("passes must be >= 0");
    if (interval < 1) throw ConfigError("correction interval must be >= 1");
    if (!(tolerance >= 0.0)) throw ConfigError("correction tolerance must be >= 0");
}

namespace {

constexpr int kMaxHalvings = 30;

// Exact change of Q when w_leaf moves by `step`.
double exact_change(const TrainingState& state, std::size_t tree, NodeId leaf, double step,
                    const PenaltyDerivatives& pen, double lambda) {
    const std::array<std::span<const std::uint32_t>, 1> groups{state.members(tree, leaf)};
    const std::array<double, 1> shifts{step};
    const double loss_change = state.objective().shifted_change(state.outputs(), groups, shifts);
    double penalty_change = 0.0;
    if (state.reg().kind == RegKind::leaf_l2) {
        const double w = state.forest().tree(tree).node(leaf).weight;
        penalty_change = 0.5 * lambda * ((w + step) * (w + step) - w * w);
    } else {
        // The penalty is exactly quadratic in one leaf weight.
        penalty_change = pen.first * step + 0.5 * pen.second * step * step;
    }
    return loss_change + penalty_change;
}

}  // namespace

CorrectionStats correct_weights(TrainingState& state, const CorrectionConfig& config, double lambda,
                                const WeightUpdateHook& after_update) {
    config.validate();
    CorrectionStats stats;
    const double normalizer = state.objective().normalizer();
    double q = state.objective_value(lambda);
    stats.objective_before = q;

    for (int sweep = 0; sweep < config.passes; ++sweep) {
        const double q_start = q;
        for (std::size_t t = 0; t < state.forest().tree_count(); ++t) {
            for (NodeId leaf : state.forest().tree(t).leaves()) {
                const auto instances = state.members(t, leaf);
                double grad = 0.0;
                double hess = 0.0;
                for (auto i : instances) {
                    grad += state.buffers().first[i];
                    hess += state.buffers().second[i];
                }
                const auto raw = state.regularizer(t).derivatives(state.forest().tree(t), leaf);
                const PenaltyDerivatives pen{lambda * raw.first, lambda * raw.second};
                const double denom = hess + normalizer * pen.second;
                if (!(denom > kCurvatureEpsilon)) {
                    ++stats.skipped;
                    continue;
                }
                double step = config.eta * (-grad - normalizer * pen.first) / denom;
                if (step == 0.0 || !std::isfinite(step)) continue;

                int halvings = 0;
                while (exact_change(state, t, leaf, step, pen, lambda) > 0.0 && halvings < kMaxHalvings) {
                    step *= 0.5;
                    ++halvings;
                }
                if (halvings == kMaxHalvings) {
                    ++stats.skipped;
                    continue;
                }
                if (halvings > 0) ++stats.backtracked;
                state.add_to_leaf(t, leaf, step);
                ++stats.updates;
                if (after_update) after_update(state);
            }
        }
        ++stats.sweeps;
        q = state.objective_value(lambda);
        if (std::abs(q_start - q) <= config.tolerance * std::max(std::abs(q_start), 1e-300)) break;
    }
    stats.objective_after = q;
    return stats;
}

}  // namespace rgf
