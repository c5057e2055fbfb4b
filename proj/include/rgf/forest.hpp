#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rgf {

using NodeId = int;
inline constexpr NodeId kNoNode = -1;

/// One node of a decision tree. Left child takes x[feature] <= threshold.
struct Node {
    NodeId parent = kNoNode;
    NodeId left = kNoNode;
    NodeId right = kNoNode;
    int feature = -1;
    double threshold = 0.0;
    double weight = 0.0;
    int depth = 0;

    bool is_leaf() const noexcept { return left == kNoNode; }
};

/// A binary decision tree in leaf-only form: internal nodes carry weight 0.
///
/// Node ids are indices into nodes() and follow creation order, so a parent
/// id is always smaller than its children's.
class Tree {
public:
    /// A single root leaf with the given weight.
    explicit Tree(double root_weight = 0.0);

    std::size_t size() const noexcept { return nodes_.size(); }
    const Node& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }
    std::span<const Node> nodes() const noexcept { return nodes_; }
    static constexpr NodeId root() { return 0; }

    /// Leaf ids in creation order.
    std::vector<NodeId> leaves() const;
    std::size_t leaf_count() const noexcept { return leaf_count_; }
    int max_depth() const;

    /// Incremented on every split; weight changes leave it untouched.
    std::uint64_t topology_version() const noexcept { return version_; }

    /// Turns `leaf` into an internal node with weight 0 and two leaf children.
    /// Returns (left, right).
    std::pair<NodeId, NodeId> split(NodeId leaf, int feature, double threshold, double left_weight,
                                    double right_weight);

    void set_weight(NodeId leaf, double weight);
    void add_weight(NodeId leaf, double delta) { set_weight(leaf, node(leaf).weight + delta); }

    /// 1 iff x satisfies every decision on the root-to-node path.
    bool evaluate_rule(NodeId id, std::span<const double> x) const;

    /// The unique leaf whose rule fires for x.
    NodeId find_leaf(std::span<const double> x) const;
    double predict(std::span<const double> x) const { return node(find_leaf(x)).weight; }

    /// Builds a tree from a full node table (ids = indices). Validates
    /// linkage, depths and the leaf-only invariant.
    static Tree from_nodes(std::vector<Node> nodes);

private:
    std::vector<Node> nodes_;
    std::size_t leaf_count_ = 1;
    std::uint64_t version_ = 0;
};

/// Additive model over the leaves of an ordered list of trees.
class Forest {
public:
    Forest() = default;

    std::size_t tree_count() const noexcept { return trees_.size(); }
    const Tree& tree(std::size_t k) const { return trees_[k]; }
    Tree& tree(std::size_t k) { return trees_[k]; }
    std::span<const Tree> trees() const noexcept { return trees_; }
    bool empty() const noexcept { return trees_.empty(); }

    /// Appends a tree; trees are ordered by creation.
    std::size_t add_tree(Tree tree);

    std::size_t leaf_count() const;
    double predict(std::span<const double> x) const;

    friend bool operator==(const Forest& a, const Forest& b);

private:
    std::vector<Tree> trees_;
};

bool operator==(const Node& a, const Node& b);

/// A tree topology with arbitrary weights on every node (internal included).
struct WeightedTreeView {
    const Tree* topology = nullptr;
    std::vector<double> weights;  // indexed by node id

    /// sum over nodes v with rule v firing of weights[v].
    double predict(std::span<const double> x) const;
};

/// Leaf-only tree with leaf weight = sum of view weights over the leaf's
/// ancestors and itself.
Tree collapse_to_leaf_only(const WeightedTreeView& view);

/// Path sums from the root: out[v] = sum of weights over ancestors of v and v.
std::vector<double> path_sums(const Tree& topology, std::span<const double> weights);

// ---------------------------------------------------------------------------
// Model file format (text, LF line endings):
//
//   RGF-MODEL v1
//   trees <K>
//   tree <node-count>                       (K times, followed by its nodes)
//   N <id> <parent|-> <feature> <threshold>  internal node
//   N <id> <parent|-> LEAF <weight>          leaf
//
// Nodes are listed in preorder (left subtree first); the first child listed
// under a parent is its left child. Numbers use the shortest decimal form
// that parses back to the same double.

std::string serialize(const Forest& forest);
Forest deserialize(std::string_view text);

void save_model(const Forest& forest, const std::string& path);
Forest load_model(const std::string& path);

}  // namespace rgf
