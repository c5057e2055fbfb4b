#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rgf/dataset.hpp"
#include "rgf/forest.hpp"
#include "rgf/loss.hpp"

namespace rgf {

enum class BoostVariant { generic, gbdt, fully_corrective };

BoostVariant parse_variant(std::string_view token);  // generic | gbdt | fc
std::string_view variant_token(BoostVariant variant);

struct GBDTConfig {
    LossKind loss = LossKind::square;
    std::size_t tree_leaves = 5;    // J
    std::size_t num_trees = 100;    // K
    double shrink = 0.1;            // s; ignored by fully_corrective
    std::uint64_t seed = 1;         // kept for the CLI; fitting draws no random numbers
    BoostVariant variant = BoostVariant::gbdt;
    std::size_t min_node_instances = 1;
    int corrective_passes = 50;     // coordinate sweeps per fully corrective step

    /// J >= 2, K >= 1, 0 <= s <= 1 (s = 0 leaves the model at the bias).
    void validate() const;
};

/// Greedy least-squares regression tree with up to `max_leaves` leaves: keep
/// splitting the leaf whose best split most reduces the squared error around
/// the leaf means. Leaf values are the mean target of their instances.
/// Thresholds and ties follow the growth search (lower feature, then smaller
/// threshold; among leaves, the older one).
Tree fit_regression_tree(const Dataset& data, const SortedFeatureIndex& index, std::span<const double> targets,
                         std::size_t max_leaves, std::size_t min_node_instances = 1);

struct BoostRound {
    std::size_t trees = 0;  // fitted trees so far, bias excluded
    double train_loss = 0.0;
    std::optional<double> monitor_rmse;
};

struct BoostResult {
    Forest forest;  // tree 0 is the single-leaf bias
    std::vector<BoostRound> rounds;  // rounds[0] is the bias-only model
};

/// Gradient boosting over regression trees fitted to the negative gradient.
///   generic           one step size for the whole tree, h += s * beta * g
///   gbdt              one step per leaf, h += s * sum_j beta_j g_j
///   fully_corrective  after each new tree, re-optimize every leaf value so
///                     far by coordinate descent (no shrinkage)
/// Step sizes come from one-dimensional Newton iterated to 1e-10.
BoostResult boost(const Dataset& data, const GBDTConfig& config, const Dataset* monitor = nullptr);

/// Loss minimization over the leaf values of fixed trees by coordinate
/// descent (at most `passes` sweeps). Topology is unchanged.
Forest fully_correct(const Forest& forest, const Dataset& data, LossKind loss, int passes);

}  // namespace rgf
