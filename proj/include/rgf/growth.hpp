#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rgf/dataset.hpp"
#include "rgf/regularizer.hpp"
#include "rgf/training_state.hpp"

namespace rgf {

inline constexpr std::size_t kAllTrees = std::numeric_limits<std::size_t>::max();

struct GrowthConfig {
    std::size_t recent_trees = 1;        // search leaves of the newest t trees (kAllTrees: every tree)
    std::size_t min_node_instances = 1;  // per child
    std::size_t max_leaf = 1000;         // total leaf budget

    void validate() const;
};

/// Curvature guard on Newton denominators.
inline constexpr double kCurvatureEpsilon = 1e-12;

enum class OpKind { split_leaf, new_tree };

/// A structure change: split leaf `leaf` of tree `tree`, or start a new tree.
/// Children take x[feature] <= threshold (left) / > threshold (right) and
/// receive weight increments delta_left / delta_right.
struct StructureOp {
    OpKind kind = OpKind::new_tree;
    std::size_t tree = 0;
    NodeId leaf = Tree::root();
    int feature = -1;
    double threshold = 0.0;
    double delta_left = 0.0;
    double delta_right = 0.0;
    double reduction = 0.0;  // estimated Q(F) - Q(o(F))
};

/// Sums of loss derivatives over the instances reaching a candidate child.
struct NodeAggregate {
    double grad = 0.0;
    double hess = 0.0;
    std::size_t count = 0;
};

/// One Newton step per child:
///   delta_k = (-G_k - N R') / (H_k + N R'')
/// with R', R'' the lambda-scaled penalty derivatives at zero increments and N
/// the loss normalizer. Empty when a denominator is <= kCurvatureEpsilon.
std::optional<std::pair<double, double>> newton_deltas(const NodeAggregate& left, const NodeAggregate& right,
                                                       const PenaltyDerivatives& penalty, double normalizer);

/// Estimated reduction of the regularized objective for a candidate: the loss
/// part from the second-order model, the penalty part exact.
double estimated_reduction(const NodeAggregate& left, const NodeAggregate& right, double d1, double d2,
                           double normalizer, double penalty_change);

/// Best split over every feature of an instance set given its per-feature
/// ascending order. Thresholds are midpoints between consecutive distinct
/// values; ties keep the lower feature, then the smaller threshold.
std::optional<StructureOp> scan_splits(const SortedFeatureIndex& index,
                                       std::span<const std::span<const std::uint32_t>> sorted,
                                       const DerivativeBuffers& buffers, double normalizer,
                                       const SplitPenaltyModel& penalty, double lambda,
                                       std::size_t min_node_instances);

/// Midpoint of a < b that still sorts a to the left and b to the right.
double midpoint_threshold(double a, double b);

/// Structured greedy search over leaf splits of the newest trees plus a new
/// stump, with per-leaf candidate caching and per-leaf sorted instance lists.
class Grower {
public:
    Grower(const SortedFeatureIndex& index, GrowthConfig config);

    const GrowthConfig& config() const noexcept { return config_; }

    /// Best split of one existing leaf under `lambda`; empty if none is valid.
    std::optional<StructureOp> best_split_of_leaf(const TrainingState& state, std::size_t tree, NodeId leaf,
                                                  double lambda);
    /// Best stump over all instances as a new tree.
    std::optional<StructureOp> best_new_tree(const TrainingState& state, double lambda) const;

    /// Highest-reduction operation, or empty if none reduces the objective.
    std::optional<StructureOp> best_operation(const TrainingState& state, double lambda);

    /// Performs the operation on `state` and updates the sorted lists.
    void apply(TrainingState& state, const StructureOp& op);

    /// Trees currently eligible for leaf splits.
    std::pair<std::size_t, std::size_t> window(const TrainingState& state) const;

private:
    struct LeafScratch {
        std::vector<std::vector<std::uint32_t>> sorted;  // per feature
        bool cached = false;
        double lambda = 0.0;
        std::optional<StructureOp> best;
    };
    struct TreeScratch {
        std::vector<LeafScratch> nodes;  // by node id; only leaves populated
        bool active = false;
    };

    void sync(const TrainingState& state);
    void partition(std::size_t tree, NodeId leaf, NodeId left, NodeId right, int feature, double threshold, std::span<const std::span<const std::uint32_t>> parent_sorted);

    const SortedFeatureIndex* index_;
    GrowthConfig config_;
    std::vector<TreeScratch> trees_;
    std::uint64_t seen_revision_ = 0;
};

}  // namespace rgf
