#include "rgf/boosting.hpp"

#include <array>
#include <cmath>
#include <string>

#include "rgf/correction.hpp"
#include "rgf/error.hpp"
#include "rgf/growth.hpp"
#include "rgf/training_state.hpp"

namespace rgf {

BoostVariant parse_variant(std::string_view token) {
    if (token == "generic") return BoostVariant::generic;
    if (token == "gbdt") return BoostVariant::gbdt;
    if (token == "fc" || token == "fully_corrective") return BoostVariant::fully_corrective;
    throw ConfigError("unknown variant '" + std::string(token) + "' (expected generic, gbdt or fc)");
}

std::string_view variant_token(BoostVariant variant) {
    switch (variant) {
        case BoostVariant::generic: return "generic";
        case BoostVariant::gbdt: return "gbdt";
        case BoostVariant::fully_corrective: return "fc";
    }
    return "?";
}

void GBDTConfig::validate() const {
    if (tree_leaves < 2) throw ConfigError("tree-leaves must be >= 2");
    if (num_trees < 1) throw ConfigError("num-trees must be >= 1");
    if (!(shrink >= 0.0 && shrink <= 1.0)) throw ConfigError("shrink must be in [0, 1]");
    if (min_node_instances < 1) throw ConfigError("min_node_instances must be >= 1");
    if (corrective_passes < 1) throw ConfigError("corrective passes must be >= 1");
}

// ---------------------------------------------------------------------------
// Base learner

namespace {

struct LeafSplit {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
};

struct WorkLeaf {
    NodeId id = kNoNode;
    std::vector<std::vector<std::uint32_t>> sorted;  // per feature
    std::optional<LeafSplit> best;
};

std::optional<LeafSplit> best_ls_split(const SortedFeatureIndex& index, const WorkLeaf& leaf, std::span<const double> y,
                                       std::size_t min_node) {
    const auto& first = leaf.sorted[0];
    const std::size_t n = first.size();
    if (n < 2 * min_node) return std::nullopt;
    double total = 0.0;
    for (auto i : first) total += y[i];
    const double parent = total * total / static_cast<double>(n);

    std::optional<LeafSplit> best;
    for (std::size_t j = 0; j < leaf.sorted.size(); ++j) {
        const auto& order = leaf.sorted[j];
        const double* values = index.column(j).data();
        double left = 0.0;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            left += y[order[k]];
            const std::size_t nl = k + 1;
            const double here = values[order[k]];
            const double next = values[order[k + 1]];
            if (!(here < next)) continue;
            if (nl < min_node || n - nl < min_node) continue;
            const double right = total - left;
            const double gain = left * left / static_cast<double>(nl) +
                                right * right / static_cast<double>(n - nl) - parent;
            if (!best || gain > best->gain)
                best = LeafSplit{gain, static_cast<int>(j), midpoint_threshold(here, next)};
        }
    }
    return best;
}

}  // namespace

Tree fit_regression_tree(const Dataset& data, const SortedFeatureIndex& index, std::span<const double> targets,
                         std::size_t max_leaves, std::size_t min_node_instances) {
    if (max_leaves < 1) throw ConfigError("max_leaves must be >= 1");
    if (targets.size() != data.size()) throw ConfigError("pseudo-target count mismatch");
    if (data.empty() || index.dim() == 0) throw ConfigError("cannot fit a tree without instances or features");
    Tree tree(0.0);
    std::vector<WorkLeaf> leaves(1);
    leaves[0].id = Tree::root();
    for (std::size_t j = 0; j < index.dim(); ++j) {
        const auto order = index.order(j);
        leaves[0].sorted.emplace_back(order.begin(), order.end());
    }
    leaves[0].best = best_ls_split(index, leaves[0], targets, min_node_instances);

    while (leaves.size() < max_leaves) {
        std::size_t pick = leaves.size();
        for (std::size_t k = 0; k < leaves.size(); ++k) {
            if (!leaves[k].best || !(leaves[k].best->gain > 0.0)) continue;
            if (pick == leaves.size() || leaves[k].best->gain > leaves[pick].best->gain) pick = k;
        }
        if (pick == leaves.size()) break;

        WorkLeaf parent = std::move(leaves[pick]);
        const auto split = *parent.best;
        const auto [left_id, right_id] = tree.split(parent.id, split.feature, split.threshold, 0.0, 0.0);
        WorkLeaf left{left_id, {}, {}};
        WorkLeaf right{right_id, {}, {}};
        left.sorted.resize(parent.sorted.size());
        right.sorted.resize(parent.sorted.size());
        const auto values = index.column(static_cast<std::size_t>(split.feature));
        for (std::size_t j = 0; j < parent.sorted.size(); ++j)
            for (auto i : parent.sorted[j])
                (values[i] <= split.threshold ? left.sorted[j] : right.sorted[j]).push_back(i);
        left.best = best_ls_split(index, left, targets, min_node_instances);
        right.best = best_ls_split(index, right, targets, min_node_instances);
        // Keep `leaves` in creation order so ties go to the older leaf.
        leaves.erase(leaves.begin() + static_cast<std::ptrdiff_t>(pick));
        leaves.push_back(std::move(left));
        leaves.push_back(std::move(right));
    }

    for (const auto& leaf : leaves) {
        double sum = 0.0;
        for (auto i : leaf.sorted[0]) sum += targets[i];
        tree.set_weight(leaf.id, leaf.sorted[0].empty() ? 0.0 : sum / static_cast<double>(leaf.sorted[0].size()));
    }
    return tree;
}

// ---------------------------------------------------------------------------
// Line searches on a TrainingState

namespace {

constexpr double kNewtonTolerance = 1e-10;
constexpr int kMaxNewtonSteps = 100;
constexpr int kMaxHalvings = 30;

/// Minimizes the loss along w_leaf += beta * direction[leaf] for every leaf
/// of tree `t` jointly. Returns the total beta moved.
double line_search(TrainingState& state, std::size_t t, std::span<const double> direction) {
    const Tree& tree = state.forest().tree(t);
    const auto leaves = tree.leaves();
    std::vector<std::span<const std::uint32_t>> groups;
    for (NodeId leaf : leaves) groups.push_back(state.members(t, leaf));
    std::vector<double> shifts(leaves.size());

    double moved = 0.0;
    for (int iter = 0; iter < kMaxNewtonSteps; ++iter) {
        double d1 = 0.0;
        double d2 = 0.0;
        for (std::size_t k = 0; k < leaves.size(); ++k) {
            const double v = direction[static_cast<std::size_t>(leaves[k])];
            double g = 0.0;
            double h = 0.0;
            for (auto i : groups[k]) {
                g += state.buffers().first[i];
                h += state.buffers().second[i];
            }
            d1 += v * g;
            d2 += v * v * h;
        }
        if (!(d2 > kCurvatureEpsilon)) break;
        double step = -d1 / d2;
        if (!std::isfinite(step) || step == 0.0) break;
        int halvings = 0;
        for (; halvings < kMaxHalvings; ++halvings, step *= 0.5) {
            for (std::size_t k = 0; k < leaves.size(); ++k)
                shifts[k] = step * direction[static_cast<std::size_t>(leaves[k])];
            if (state.objective().shifted_change(state.outputs(), groups, shifts) <= 0.0) break;
        }
        if (halvings == kMaxHalvings) break;
        for (std::size_t k = 0; k < leaves.size(); ++k)
            state.add_to_leaf(t, leaves[k], step * direction[static_cast<std::size_t>(leaves[k])]);
        moved += step;
        if (std::abs(step) < kNewtonTolerance) break;
    }
    return moved;
}

/// Newton on one leaf value alone. Returns the total change.
double leaf_search(TrainingState& state, std::size_t t, NodeId leaf) {
    const auto members = state.members(t, leaf);
    const std::array<std::span<const std::uint32_t>, 1> groups{members};
    double moved = 0.0;
    for (int iter = 0; iter < kMaxNewtonSteps; ++iter) {
        double g = 0.0;
        double h = 0.0;
        for (auto i : members) {
            g += state.buffers().first[i];
            h += state.buffers().second[i];
        }
        if (!(h > kCurvatureEpsilon)) break;
        double step = -g / h;
        if (!std::isfinite(step) || step == 0.0) break;
        int halvings = 0;
        for (; halvings < kMaxHalvings; ++halvings, step *= 0.5) {
            const std::array<double, 1> shifts{step};
            if (state.objective().shifted_change(state.outputs(), groups, shifts) <= 0.0) break;
        }
        if (halvings == kMaxHalvings) break;
        state.add_to_leaf(t, leaf, step);
        moved += step;
        if (std::abs(step) < kNewtonTolerance) break;
    }
    return moved;
}

RegConfig no_penalty() {
    RegConfig reg;
    reg.kind = RegKind::leaf_l2;
    reg.lambda = 0.0;
    return reg;
}

CorrectionConfig corrective(int passes) {
    CorrectionConfig c;
    c.eta = 1.0;
    c.passes = passes;
    c.tolerance = 1e-12;
    return c;
}

}  // namespace

BoostResult boost(const Dataset& data, const GBDTConfig& config, const Dataset* monitor) {
    config.validate();
    if (data.empty()) throw ConfigError("training data is empty");
    if (is_pairwise(config.loss) ? !data.has_pairs() : !data.has_targets())
        throw ConfigError(is_pairwise(config.loss) ? "pairwise loss needs preference pairs" : "training data has no targets");
    if (is_margin_loss(config.loss) && !data.has_binary_labels())
        throw ConfigError("loss " + std::string(loss_token(config.loss)) + " needs labels in {+1, -1}");
    if (monitor && !monitor->has_targets()) throw ConfigError("monitor data has no targets");

    const SortedFeatureIndex index(data);
    TrainingState state(data, config.loss, no_penalty());
    BoostResult result;

    std::vector<double> monitor_out(monitor ? monitor->size() : 0, 0.0);
    auto monitor_add = [&](const Tree& tree) {
        for (std::size_t i = 0; i < monitor_out.size(); ++i) monitor_out[i] += tree.predict(monitor->row(i));
    };
    auto record = [&](std::size_t trees) {
        BoostRound r;
        r.trees = trees;
        r.train_loss = state.loss();
        if (monitor) {
            if (config.variant == BoostVariant::fully_corrective) {
                for (std::size_t i = 0; i < monitor_out.size(); ++i)
                    monitor_out[i] = state.forest().predict(monitor->row(i));
            }
            double sum = 0.0;
            for (std::size_t i = 0; i < monitor_out.size(); ++i) {
                const double r2 = monitor_out[i] - monitor->targets()[i];
                sum += r2 * r2;
            }
            r.monitor_rmse = std::sqrt(sum / static_cast<double>(monitor_out.size()));
        }
        result.rounds.push_back(r);
    };

    // h_0: best constant.
    state.add_tree(Tree(0.0));
    leaf_search(state, 0, Tree::root());
    monitor_add(state.forest().tree(0));
    record(0);

    std::vector<double> pseudo(data.size());
    for (std::size_t k = 1; k <= config.num_trees; ++k) {
        for (std::size_t i = 0; i < data.size(); ++i) pseudo[i] = -state.buffers().first[i];
        Tree fitted = fit_regression_tree(data, index, pseudo, config.tree_leaves, config.min_node_instances);

        std::vector<double> direction(fitted.size(), 0.0);
        for (NodeId leaf : fitted.leaves()) {
            direction[static_cast<std::size_t>(leaf)] = fitted.node(leaf).weight;
            fitted.set_weight(leaf, 0.0);
        }
        const std::size_t t = state.add_tree(std::move(fitted));
        const auto leaves = state.forest().tree(t).leaves();

        switch (config.variant) {
            case BoostVariant::generic: {
                const double beta = line_search(state, t, direction);
                for (NodeId leaf : leaves)
                    state.add_to_leaf(t, leaf, (config.shrink - 1.0) * beta * direction[static_cast<std::size_t>(leaf)]);
                break;
            }
            case BoostVariant::gbdt: {
                for (NodeId leaf : leaves) {
                    const double beta = leaf_search(state, t, leaf);
                    state.add_to_leaf(t, leaf, (config.shrink - 1.0) * beta);
                }
                break;
            }
            case BoostVariant::fully_corrective: {
                for (NodeId leaf : leaves) leaf_search(state, t, leaf);
                correct_weights(state, corrective(config.corrective_passes), 0.0);
                break;
            }
        }
        if (config.variant != BoostVariant::fully_corrective) monitor_add(state.forest().tree(t));
        record(k);
    }
    result.forest = state.forest();
    return result;
}

Forest fully_correct(const Forest& forest, const Dataset& data, LossKind loss, int passes) {
    TrainingState state(data, loss, no_penalty());
    for (const Tree& tree : forest.trees()) state.add_tree(tree);
    correct_weights(state, corrective(passes), 0.0);
    return state.forest();
}

}  // namespace rgf
