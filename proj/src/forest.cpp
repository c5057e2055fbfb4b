#include "rgf/forest.hpp"

#include <algorithm>

#include "rgf/error.hpp"

namespace rgf {

Tree::Tree(double root_weight) { nodes_.push_back(Node{.weight = root_weight}); }

std::vector<NodeId> Tree::leaves() const {
    std::vector<NodeId> out;
    out.reserve(leaf_count_);
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].is_leaf()) out.push_back(static_cast<NodeId>(i));
    return out;
}

int Tree::max_depth() const {
    int d = 0;
    for (const auto& n : nodes_) d = std::max(d, n.depth);
    return d;
}

std::pair<NodeId, NodeId> Tree::split(NodeId leaf, int feature, double threshold, double left_weight,
                                      double right_weight) {
    if (leaf < 0 || static_cast<std::size_t>(leaf) >= nodes_.size() || !node(leaf).is_leaf())
        throw ConfigError("split target is not a leaf");
    const auto left = static_cast<NodeId>(nodes_.size());
    const auto right = left + 1;
    const int depth = node(leaf).depth + 1;
    nodes_.push_back(Node{.parent = leaf, .weight = left_weight, .depth = depth});
    nodes_.push_back(Node{.parent = leaf, .weight = right_weight, .depth = depth});
    Node& n = nodes_[static_cast<std::size_t>(leaf)];
    n.left = left;
    n.right = right;
    n.feature = feature;
    n.threshold = threshold;
    n.weight = 0.0;
    ++leaf_count_;
    ++version_;
    return {left, right};
}

void Tree::set_weight(NodeId leaf, double weight) {
    Node& n = nodes_[static_cast<std::size_t>(leaf)];
    if (!n.is_leaf()) throw ConfigError("weights live on leaves only");
    n.weight = weight;
}

bool Tree::evaluate_rule(NodeId id, std::span<const double> x) const {
    NodeId child = id;
    NodeId parent = node(id).parent;
    while (parent != kNoNode) {
        const Node& p = node(parent);
        const bool goes_left = x[static_cast<std::size_t>(p.feature)] <= p.threshold;
        if (goes_left != (p.left == child)) return false;
        child = parent;
        parent = p.parent;
    }
    return true;
}

NodeId Tree::find_leaf(std::span<const double> x) const {
    NodeId id = root();
    while (!node(id).is_leaf()) {
        const Node& n = node(id);
        id = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return id;
}

Tree Tree::from_nodes(std::vector<Node> nodes) {
    if (nodes.empty()) throw ModelFormatError("tree with no nodes");
    Tree t;
    t.nodes_ = std::move(nodes);
    std::size_t leaves = 0;
    for (std::size_t i = 0; i < t.nodes_.size(); ++i) {
        const Node& n = t.nodes_[i];
        const auto id = static_cast<NodeId>(i);
        if (i == 0 ? n.parent != kNoNode : (n.parent < 0 || n.parent >= id))
            throw ModelFormatError("bad parent for node " + std::to_string(i));
        if (i > 0) {
            const Node& p = t.nodes_[static_cast<std::size_t>(n.parent)];
            if (p.left != id && p.right != id) throw ModelFormatError("node " + std::to_string(i) + " is not a child of its parent");
            if (n.depth != p.depth + 1) throw ModelFormatError("bad depth for node " + std::to_string(i));
        }
        if (n.is_leaf()) {
            if (n.right != kNoNode) throw ModelFormatError("leaf with one child");
            ++leaves;
        } else {
            if (n.right == kNoNode || n.feature < 0) throw ModelFormatError("internal node without split");
            if (n.weight != 0.0) throw ModelFormatError("internal node with nonzero weight");
        }
    }
    t.leaf_count_ = leaves;
    t.version_ = (t.nodes_.size() - 1) / 2;
    return t;
}

// ---------------------------------------------------------------------------

std::size_t Forest::add_tree(Tree tree) {
    trees_.push_back(std::move(tree));
    return trees_.size() - 1;
}

std::size_t Forest::leaf_count() const {
    std::size_t n = 0;
    for (const auto& t : trees_) n += t.leaf_count();
    return n;
}

double Forest::predict(std::span<const double> x) const {
    double sum = 0.0;
    for (const auto& t : trees_) sum += t.predict(x);
    return sum;
}

bool operator==(const Node& a, const Node& b) {
    return a.parent == b.parent && a.left == b.left && a.right == b.right && a.feature == b.feature &&
           a.threshold == b.threshold && a.weight == b.weight && a.depth == b.depth;
}

bool operator==(const Forest& a, const Forest& b) {
    if (a.tree_count() != b.tree_count()) return false;
    for (std::size_t k = 0; k < a.tree_count(); ++k) {
        const auto na = a.tree(k).nodes();
        const auto nb = b.tree(k).nodes();
        if (!std::equal(na.begin(), na.end(), nb.begin(), nb.end())) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------

double WeightedTreeView::predict(std::span<const double> x) const {
    double sum = 0.0;
    NodeId id = Tree::root();
    while (true) {
        sum += weights[static_cast<std::size_t>(id)];
        const Node& n = topology->node(id);
        if (n.is_leaf()) return sum;
        id = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
}

std::vector<double> path_sums(const Tree& topology, std::span<const double> weights) {
    std::vector<double> sums(topology.size());
    for (std::size_t i = 0; i < topology.size(); ++i) {
        const NodeId p = topology.node(static_cast<NodeId>(i)).parent;
        sums[i] = weights[i] + (p == kNoNode ? 0.0 : sums[static_cast<std::size_t>(p)]);
    }
    return sums;
}

Tree collapse_to_leaf_only(const WeightedTreeView& view) {
    const auto sums = path_sums(*view.topology, view.weights);
    std::vector<Node> nodes(view.topology->nodes().begin(), view.topology->nodes().end());
    for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i].weight = nodes[i].is_leaf() ? sums[i] : 0.0;
    return Tree::from_nodes(std::move(nodes));
}

}  // namespace rgf
