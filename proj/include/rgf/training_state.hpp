#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rgf/dataset.hpp"
#include "rgf/forest.hpp"
#include "rgf/loss.hpp"
#include "rgf/regularizer.hpp"

namespace rgf {

/// A forest being fit to a dataset, with everything kept in sync with it:
/// per-instance outputs, loss derivatives, the instances reaching each leaf,
/// and each tree's regularizer cache.
///
/// The regularizer cache is lambda-free; callers pass the lambda that applies
/// (growth and correction may use different strengths).
class TrainingState {
public:
    TrainingState(const Dataset& data, LossKind loss, const RegConfig& reg);

    const Dataset& data() const noexcept { return objective_.data(); }
    const Objective& objective() const noexcept { return objective_; }
    const RegConfig& reg() const noexcept { return reg_; }
    const Forest& forest() const noexcept { return forest_; }
    std::span<const double> outputs() const noexcept { return outputs_; }
    const DerivativeBuffers& buffers() const noexcept { return buffers_; }
    const TreeRegularizer& regularizer(std::size_t tree) const { return regs_[tree]; }

    /// Instances reaching `leaf`, ascending. Empty for internal nodes.
    std::span<const std::uint32_t> members(std::size_t tree, NodeId leaf) const;
    std::span<const std::uint32_t> all_instances() const noexcept { return everyone_; }

    double loss() const { return objective_.total(outputs_); }
    /// lambda * sum of per-tree unscaled penalties.
    double penalty(double lambda) const;
    double objective_value(double lambda) const { return loss() + penalty(lambda); }

    /// Splits a leaf of an existing tree; children get weight w + d1 / w + d2.
    std::pair<NodeId, NodeId> split_leaf(std::size_t tree, NodeId leaf, int feature, double threshold, double d1,
                                         double d2);
    /// New stump with leaf weights d1 / d2. Returns its tree index.
    std::size_t start_tree(int feature, double threshold, double d1, double d2);
    /// Adds an arbitrary tree (boosting baselines).
    std::size_t add_tree(Tree tree);
    /// w_leaf += delta, with outputs, buffers and regularizer refreshed.
    void add_to_leaf(std::size_t tree, NodeId leaf, double delta);

    /// Bumped by every mutation; lets caches detect outside changes.
    std::uint64_t revision() const noexcept { return revision_; }

    /// Largest |incremental output - full recomputation| over instances.
    double output_drift() const;

private:
    void shift(std::span<const std::uint32_t> instances, double delta);
    void distribute(std::size_t tree, NodeId node, std::vector<std::uint32_t> instances);

    Objective objective_;
    RegConfig reg_;
    Forest forest_;
    std::vector<double> outputs_;
    DerivativeBuffers buffers_;
    std::vector<TreeRegularizer> regs_;
    std::vector<std::vector<std::vector<std::uint32_t>>> members_;  // [tree][node]
    std::vector<std::uint32_t> everyone_;
    std::uint64_t revision_ = 0;
};

}  // namespace rgf
