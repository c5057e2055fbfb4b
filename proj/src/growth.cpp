#include "rgf/growth.hpp"

#include <algorithm>
#include <cmath>

#include "rgf/error.hpp"

namespace rgf {

void GrowthConfig::validate() const {
    if (recent_trees == 0) throw ConfigError("recent_trees must be >= 1");
    if (min_node_instances == 0) throw ConfigError("min_node_instances must be >= 1");
    if (max_leaf == 0) throw ConfigError("max_leaf must be >= 1");
}

std::optional<std::pair<double, double>> newton_deltas(const NodeAggregate& left, const NodeAggregate& right,
                                                       const PenaltyDerivatives& penalty, double normalizer) {
    const double den_left = left.hess + normalizer * penalty.second;
    const double den_right = right.hess + normalizer * penalty.second;
    if (!(den_left > kCurvatureEpsilon) || !(den_right > kCurvatureEpsilon)) return std::nullopt;
    return std::pair{(-left.grad - normalizer * penalty.first) / den_left,
                     (-right.grad - normalizer * penalty.first) / den_right};
}

double estimated_reduction(const NodeAggregate& left, const NodeAggregate& right, double d1, double d2,
                           double normalizer, double penalty_change) {
    const double loss_change =
        (left.grad * d1 + 0.5 * left.hess * d1 * d1 + right.grad * d2 + 0.5 * right.hess * d2 * d2) / normalizer;
    return -(loss_change + penalty_change);
}

double midpoint_threshold(double a, double b) {
    const double mid = a + 0.5 * (b - a);
    return (mid >= b || mid < a) ? a : mid;
}

std::optional<StructureOp> scan_splits(const SortedFeatureIndex& index,
                                       std::span<const std::span<const std::uint32_t>> sorted,
                                       const DerivativeBuffers& buffers, double normalizer,
                                       const SplitPenaltyModel& penalty, double lambda,
                                       std::size_t min_node_instances) {
    if (sorted.empty()) return std::nullopt;
    const auto& g = buffers.first;
    const auto& h = buffers.second;
    NodeAggregate total;
    for (auto i : sorted[0]) {
        total.grad += g[i];
        total.hess += h[i];
    }
    total.count = sorted[0].size();
    if (total.count < 2 * min_node_instances) return std::nullopt;

    const auto base = penalty.child_derivatives();
    const PenaltyDerivatives scaled{lambda * base.first, lambda * base.second};

    std::optional<StructureOp> best;
    for (std::size_t j = 0; j < sorted.size(); ++j) {
        const auto order = sorted[j];
        const double* values = index.column(j).data();
        NodeAggregate left;
        for (std::size_t k = 0; k + 1 < order.size(); ++k) {
            const auto i = order[k];
            left.grad += g[i];
            left.hess += h[i];
            ++left.count;
            const double here = values[i];
            const double next = values[order[k + 1]];
            if (!(here < next)) continue;
            if (left.count < min_node_instances || total.count - left.count < min_node_instances) continue;
            const NodeAggregate right{total.grad - left.grad, total.hess - left.hess, total.count - left.count};
            const auto deltas = newton_deltas(left, right, scaled, normalizer);
            if (!deltas) continue;
            const auto [d1, d2] = *deltas;
            const double reduction =
                estimated_reduction(left, right, d1, d2, normalizer, lambda * penalty.delta(d1, d2));
            if (!std::isfinite(reduction)) continue;
            if (!best || reduction > best->reduction) {
                best = StructureOp{.feature = static_cast<int>(j),
                                   .threshold = midpoint_threshold(here, next),
                                   .delta_left = d1,
                                   .delta_right = d2,
                                   .reduction = reduction};
            }
        }
    }
    return best;
}

// ---------------------------------------------------------------------------

Grower::Grower(const SortedFeatureIndex& index, GrowthConfig config) : index_(&index), config_(config) {
    config_.validate();
}

std::pair<std::size_t, std::size_t> Grower::window(const TrainingState& state) const {
    const std::size_t k = state.forest().tree_count();
    const std::size_t first = config_.recent_trees >= k ? 0 : k - config_.recent_trees;
    return {first, k};
}

void Grower::sync(const TrainingState& state) {
    const auto& forest = state.forest();
    if (index_->size() != state.data().size()) throw ConfigError("sorted index does not match the dataset");
    const bool outside_change = state.revision() != seen_revision_;
    trees_.resize(forest.tree_count());
    const auto [first, last] = window(state);
    for (std::size_t k = 0; k < trees_.size(); ++k) {
        auto& ts = trees_[k];
        if (k < first) {
            if (ts.active) ts = TreeScratch{};
            continue;
        }
        const Tree& tree = forest.tree(k);
        if (outside_change)
            for (auto& leaf : ts.nodes) leaf.cached = false;
        if (ts.active && ts.nodes.size() == tree.size()) continue;

        // (Re)build per-leaf sorted lists by bucketing the global order.
        ts = TreeScratch{};
        ts.active = true;
        ts.nodes.resize(tree.size());
        std::vector<NodeId> leaf_of(state.data().size(), kNoNode);
        for (NodeId leaf : tree.leaves()) {
            for (auto i : state.members(k, leaf)) leaf_of[i] = leaf;
            ts.nodes[static_cast<std::size_t>(leaf)].sorted.resize(index_->dim());
        }
        for (std::size_t j = 0; j < index_->dim(); ++j)
            for (auto i : index_->order(j))
                ts.nodes[static_cast<std::size_t>(leaf_of[i])].sorted[j].push_back(i);
    }
    seen_revision_ = state.revision();
}

std::optional<StructureOp> Grower::best_split_of_leaf(const TrainingState& state, std::size_t tree, NodeId leaf,
                                                      double lambda) {
    sync(state);
    const auto [first, last] = window(state);
    if (tree < first || tree >= last) throw ConfigError("tree is outside the growth window");
    auto& scratch = trees_[tree].nodes[static_cast<std::size_t>(leaf)];
    if (scratch.cached && scratch.lambda == lambda) return scratch.best;

    const Tree& t = state.forest().tree(tree);
    std::vector<std::span<const std::uint32_t>> sorted(scratch.sorted.begin(), scratch.sorted.end());
    auto op = scan_splits(*index_, sorted, state.buffers(), state.objective().normalizer(),
                          state.regularizer(tree).split_model(t, leaf), lambda, config_.min_node_instances);
    if (op) {
        op->kind = OpKind::split_leaf;
        op->tree = tree;
        op->leaf = leaf;
    }
    scratch.best = op;
    scratch.cached = true;
    scratch.lambda = lambda;
    return op;
}

std::optional<StructureOp> Grower::best_new_tree(const TrainingState& state, double lambda) const {
    const Tree stump_root(0.0);
    const TreeRegularizer fresh(stump_root, state.reg());
    std::vector<std::span<const std::uint32_t>> sorted;
    for (std::size_t j = 0; j < index_->dim(); ++j) sorted.push_back(index_->order(j));
    auto op = scan_splits(*index_, sorted, state.buffers(), state.objective().normalizer(),
                          fresh.split_model(stump_root, Tree::root()), lambda, config_.min_node_instances);
    if (op) {
        op->kind = OpKind::new_tree;
        op->tree = state.forest().tree_count();
        op->leaf = Tree::root();
    }
    return op;
}

std::optional<StructureOp> Grower::best_operation(const TrainingState& state, double lambda) {
    sync(state);
    std::optional<StructureOp> best;
    const auto [first, last] = window(state);
    for (std::size_t k = first; k < last; ++k) {
        for (NodeId leaf : state.forest().tree(k).leaves()) {
            const auto op = best_split_of_leaf(state, k, leaf, lambda);
            if (op && (!best || op->reduction > best->reduction)) best = op;
        }
    }
    const auto fresh = best_new_tree(state, lambda);
    if (fresh && (!best || fresh->reduction > best->reduction)) best = fresh;
    if (!best || !(best->reduction > 0.0)) return std::nullopt;
    return best;
}

void Grower::partition(std::size_t tree, NodeId leaf, NodeId left, NodeId right, int feature, double threshold, std::span<const std::span<const std::uint32_t>> parent_sorted) {
    auto& nodes = trees_[tree].nodes;
    nodes.resize(std::max<std::size_t>(nodes.size(), static_cast<std::size_t>(right) + 1));
    auto& l = nodes[static_cast<std::size_t>(left)];
    auto& r = nodes[static_cast<std::size_t>(right)];
    l = LeafScratch{};
    r = LeafScratch{};
    l.sorted.resize(parent_sorted.size());
    r.sorted.resize(parent_sorted.size());
    const auto values = index_->column(static_cast<std::size_t>(feature));
    for (std::size_t j = 0; j < parent_sorted.size(); ++j)
        for (auto i : parent_sorted[j]) (values[i] <= threshold ? l.sorted[j] : r.sorted[j]).push_back(i);
    if (static_cast<std::size_t>(leaf) < nodes.size()) nodes[static_cast<std::size_t>(leaf)] = LeafScratch{};
}

void Grower::apply(TrainingState& state, const StructureOp& op) {
    sync(state);
    const bool keep_siblings = state.reg().kind == RegKind::leaf_l2 && !is_pairwise(state.objective().kind());
    std::size_t changed_tree = 0;

    if (op.kind == OpKind::split_leaf) {
        const auto [first, last] = window(state);
        if (op.tree < first || op.tree >= last || !state.forest().tree(op.tree).node(op.leaf).is_leaf())
            throw ConfigError("operation does not match the current forest");
        auto parent = std::move(trees_[op.tree].nodes[static_cast<std::size_t>(op.leaf)].sorted);
        const auto [left, right] =
            state.split_leaf(op.tree, op.leaf, op.feature, op.threshold, op.delta_left, op.delta_right);
        std::vector<std::span<const std::uint32_t>> spans(parent.begin(), parent.end());
        partition(op.tree, op.leaf, left, right, op.feature, op.threshold, spans);
        changed_tree = op.tree;
    } else {
        if (op.tree != state.forest().tree_count()) throw ConfigError("operation does not match the current forest");
        changed_tree = state.start_tree(op.feature, op.threshold, op.delta_left, op.delta_right);
        trees_.resize(changed_tree + 1);
        trees_[changed_tree].active = true;
        trees_[changed_tree].nodes.resize(1);
        std::vector<std::span<const std::uint32_t>> spans;
        for (std::size_t j = 0; j < index_->dim(); ++j) spans.push_back(index_->order(j));
        const Node& root = state.forest().tree(changed_tree).node(Tree::root());
        partition(changed_tree, Tree::root(), root.left, root.right, op.feature, op.threshold, spans);
    }

    for (std::size_t k = 0; k < trees_.size(); ++k) {
        if (k == changed_tree && keep_siblings) continue;
        for (auto& leaf : trees_[k].nodes) leaf.cached = false;
    }
    seen_revision_ = state.revision();
    sync(state);  // retire trees that left the window
}

}  // namespace rgf
