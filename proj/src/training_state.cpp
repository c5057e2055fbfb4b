#include "rgf/training_state.hpp"

#include <cmath>
#include <numeric>

#include "rgf/error.hpp"

namespace rgf {

TrainingState::TrainingState(const Dataset& data, LossKind loss, const RegConfig& reg)
    : objective_(loss, data), reg_(reg), outputs_(data.size(), 0.0), everyone_(data.size()) {
    reg_.validate();
    std::iota(everyone_.begin(), everyone_.end(), 0u);
    objective_.derivatives(outputs_, buffers_);
}

std::span<const std::uint32_t> TrainingState::members(std::size_t tree, NodeId leaf) const {
    return members_[tree][static_cast<std::size_t>(leaf)];
}

double TrainingState::penalty(double lambda) const {
    double sum = 0.0;
    for (const auto& r : regs_) sum += r.value();
    return lambda * sum;
}

void TrainingState::shift(std::span<const std::uint32_t> instances, double delta) {
    if (delta == 0.0) return;
    for (auto i : instances) outputs_[i] += delta;
    objective_.update(outputs_, instances, buffers_);
}

std::pair<NodeId, NodeId> TrainingState::split_leaf(std::size_t tree, NodeId leaf, int feature, double threshold,
                                                    double d1, double d2) {
    ++revision_;
    Tree& t = forest_.tree(tree);
    const double alpha = t.node(leaf).weight;
    const auto [left, right] = t.split(leaf, feature, threshold, alpha + d1, alpha + d2);

    auto parent_members = std::move(members_[tree][static_cast<std::size_t>(leaf)]);
    members_[tree][static_cast<std::size_t>(leaf)].clear();
    std::vector<std::uint32_t> to_left;
    std::vector<std::uint32_t> to_right;
    for (auto i : parent_members) (data().value(i, static_cast<std::size_t>(feature)) <= threshold ? to_left : to_right).push_back(i);
    members_[tree].resize(t.size());
    members_[tree][static_cast<std::size_t>(left)] = std::move(to_left);
    members_[tree][static_cast<std::size_t>(right)] = std::move(to_right);

    shift(members_[tree][static_cast<std::size_t>(left)], d1);
    shift(members_[tree][static_cast<std::size_t>(right)], d2);
    regs_[tree].rebuild(t, reg_);
    return {left, right};
}

std::size_t TrainingState::start_tree(int feature, double threshold, double d1, double d2) {
    const std::size_t k = add_tree(Tree(0.0));
    split_leaf(k, Tree::root(), feature, threshold, d1, d2);
    return k;
}

void TrainingState::distribute(std::size_t tree, NodeId node, std::vector<std::uint32_t> instances) {
    const Tree& t = forest_.tree(tree);
    const Node& n = t.node(node);
    if (n.is_leaf()) {
        members_[tree][static_cast<std::size_t>(node)] = std::move(instances);
        return;
    }
    std::vector<std::uint32_t> to_left;
    std::vector<std::uint32_t> to_right;
    for (auto i : instances) (data().value(i, static_cast<std::size_t>(n.feature)) <= n.threshold ? to_left : to_right).push_back(i);
    distribute(tree, n.left, std::move(to_left));
    distribute(tree, n.right, std::move(to_right));
}

std::size_t TrainingState::add_tree(Tree tree) {
    ++revision_;
    const std::size_t k = forest_.add_tree(std::move(tree));
    members_.emplace_back(forest_.tree(k).size());
    distribute(k, Tree::root(), everyone_);
    regs_.emplace_back(forest_.tree(k), reg_);
    std::vector<std::uint32_t> touched;
    for (NodeId leaf : forest_.tree(k).leaves()) {
        const double w = forest_.tree(k).node(leaf).weight;
        if (w == 0.0) continue;
        for (auto i : members(k, leaf)) {
            outputs_[i] += w;
            touched.push_back(i);
        }
    }
    objective_.update(outputs_, touched, buffers_);
    return k;
}

void TrainingState::add_to_leaf(std::size_t tree, NodeId leaf, double delta) {
    if (delta == 0.0) return;
    ++revision_;
    Tree& t = forest_.tree(tree);
    t.add_weight(leaf, delta);
    shift(members(tree, leaf), delta);
    regs_[tree].on_weight_change(t, leaf, delta);
}

double TrainingState::output_drift() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < data().size(); ++i)
        worst = std::max(worst, std::abs(outputs_[i] - forest_.predict(data().row(i))));
    return worst;
}

}  // namespace rgf
