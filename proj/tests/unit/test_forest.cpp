#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>

#include "oracles.hpp"
#include "rgf/error.hpp"
#include "rgf/forest.hpp"

using namespace rgf;

namespace {

Tree stump(double left, double right) {
    Tree t;
    t.split(Tree::root(), 0, 0.5, left, right);
    return t;
}

// Sum over all nodes of weight * rule, the definition of the model output.
double all_node_output(const Forest& f, std::span<const double> x) {
    double s = 0.0;
    for (const auto& tree : f.trees())
        for (std::size_t i = 0; i < tree.size(); ++i)
            if (tree.evaluate_rule(static_cast<NodeId>(i), x)) s += tree.node(static_cast<NodeId>(i)).weight;
    return s;
}

}  // namespace

TEST_CASE("rule evaluation") {
    Tree t = stump(1.0, -2.0);
    const double at_threshold[] = {0.5};
    CHECK(t.evaluate_rule(Tree::root(), at_threshold));
    CHECK(t.evaluate_rule(1, at_threshold));
    CHECK_FALSE(t.evaluate_rule(2, at_threshold));

    Tree deep;
    const auto [l, r] = deep.split(Tree::root(), 0, 0.5, 0.0, 0.0);
    (void)r;
    const auto [ll, lr] = deep.split(l, 1, 0.2, 0.0, 0.0);
    (void)ll;
    const double x[] = {0.3, 0.9};
    CHECK(deep.evaluate_rule(lr, x));
    CHECK(deep.node(lr).depth == 2);
}

TEST_CASE("prediction") {
    Forest f;
    CHECK(f.predict(std::vector<double>{0.3}) == 0.0);
    f.add_tree(stump(1.0, -2.0));
    const double x[] = {0.3};
    CHECK(f.predict(x) == 1.0);
    f.add_tree(stump(1.0, -2.0));
    CHECK(f.predict(x) == 2.0);
    CHECK(f.leaf_count() == 4);
}

TEST_CASE("random forest prediction equals the all-node sum and one leaf fires") {
    Rng rng(8);
    Forest f;
    for (int k = 0; k < 5; ++k) f.add_tree(oracle::random_tree(rng, 1 + rng.below(8), 3));
    for (int k = 0; k < 100; ++k) {
        const double x[] = {rng.uniform01(), rng.uniform01(), rng.uniform01()};
        CHECK(f.predict(x) == doctest::Approx(all_node_output(f, x)).epsilon(1e-14));
        for (const auto& tree : f.trees()) {
            int fired = 0;
            for (NodeId leaf : tree.leaves()) fired += tree.evaluate_rule(leaf, x);
            CHECK(fired == 1);
            for (const auto& n : tree.nodes()) {
                if (n.is_leaf()) continue;
                const NodeId id = tree.node(n.left).parent;
                CHECK(tree.evaluate_rule(id, x) == tree.evaluate_rule(n.left, x) + tree.evaluate_rule(n.right, x));
            }
        }
    }
}

TEST_CASE("collapse to leaf-only weights") {
    Tree t = stump(0.0, 0.0);
    WeightedTreeView view{&t, {2.0, 1.0, -1.0}};
    const Tree c = collapse_to_leaf_only(view);
    CHECK(c.node(1).weight == 3.0);
    CHECK(c.node(2).weight == 1.0);
    CHECK(c.node(0).weight == 0.0);

    WeightedTreeView zero{&t, {0.0, 0.0, 0.0}};
    const Tree z = collapse_to_leaf_only(zero);
    CHECK(z.node(1).weight == 0.0);
    CHECK(z.node(2).weight == 0.0);

    Rng rng(12);
    Tree topo;
    while (topo.max_depth() < 4) {
        const auto leaves = topo.leaves();
        topo.split(leaves[rng.below(leaves.size())], static_cast<int>(rng.below(2)), rng.uniform01(), 0.0, 0.0);
    }
    WeightedTreeView random_view{&topo, std::vector<double>(topo.size())};
    for (auto& w : random_view.weights) w = rng.normal();
    const Tree collapsed = collapse_to_leaf_only(random_view);
    for (int k = 0; k < 200; ++k) {
        const double x[] = {rng.uniform01(), rng.uniform01()};
        CHECK(std::abs(collapsed.predict(x) - random_view.predict(x)) <= 1e-12);
    }
}

TEST_CASE("tree mutation errors") {
    Tree t = stump(1.0, 2.0);
    CHECK_THROWS_AS(t.split(Tree::root(), 0, 0.1, 0.0, 0.0), ConfigError);
    CHECK_THROWS_AS(t.set_weight(Tree::root(), 1.0), ConfigError);
    const auto before = t.topology_version();
    t.add_weight(1, 0.5);
    CHECK(t.topology_version() == before);
    CHECK(t.node(1).weight == 1.5);
}

TEST_CASE("serialization") {
    SUBCASE("empty forest") {
        const std::string text = serialize(Forest{});
        CHECK(text == "RGF-MODEL v1\ntrees 0\n");
        CHECK(deserialize(text).empty());
    }
    SUBCASE("stump keeps its boundary") {
        Forest f;
        Tree t;
        t.split(Tree::root(), 0, 0.1 + 0.2, -1.0 / 3.0, 2.0);
        f.add_tree(t);
        const Forest back = deserialize(serialize(f));
        const double x[] = {0.1 + 0.2};
        CHECK(back.predict(x) == -1.0 / 3.0);
        CHECK(back == f);
        CHECK(serialize(f) == "RGF-MODEL v1\ntrees 1\ntree 3\nN 0 - 0 0.30000000000000004\n"
                              "N 1 0 LEAF -0.3333333333333333\nN 2 0 LEAF 2\n");
    }
    SUBCASE("random forest round trip through a file") {
        Rng rng(21);
        Forest f;
        for (int k = 0; k < 50; ++k) f.add_tree(oracle::random_tree(rng, rng.below(10), 4));
        const auto path = (std::filesystem::temp_directory_path() / "rgf_forest_rt.model").string();
        save_model(f, path);
        const Forest back = load_model(path);
        CHECK(back == f);
        for (int k = 0; k < 10000; ++k) {
            const double x[] = {rng.uniform01(), rng.uniform01(), rng.uniform01(), rng.uniform01()};
            REQUIRE(back.predict(x) == f.predict(x));
        }
        std::filesystem::remove(path);
    }
}

TEST_CASE("malformed model streams") {
    CHECK_THROWS_AS(deserialize(""), ModelFormatError);
    CHECK_THROWS_AS(deserialize("RGF-MODEL v2\ntrees 0\n"), ModelFormatError);
    CHECK_THROWS_AS(deserialize("hello\n"), ModelFormatError);
    CHECK_THROWS_AS(deserialize("RGF-MODEL v1\ntrees 1\n"), ModelFormatError);
    CHECK_THROWS_AS(deserialize("RGF-MODEL v1\ntrees 1\ntree 3\nN 0 - 0 0.5\nN 1 0 LEAF 1\n"), ModelFormatError);
    CHECK_THROWS_AS(deserialize("RGF-MODEL v1\ntrees 1\ntree 1\nN 0 - LEAF abc\n"), ModelFormatError);
    CHECK_THROWS_AS(load_model("/nonexistent/path.model"), Error);
}

TEST_CASE("from_nodes validates the leaf-only invariant") {
    std::vector<Node> nodes(3);
    nodes[0] = Node{kNoNode, 1, 2, 0, 0.5, 1.0, 0};
    nodes[1] = Node{0, kNoNode, kNoNode, -1, 0.0, 1.0, 1};
    nodes[2] = Node{0, kNoNode, kNoNode, -1, 0.0, 2.0, 1};
    CHECK_THROWS_AS(Tree::from_nodes(nodes), ModelFormatError);
    nodes[0].weight = 0.0;
    CHECK(Tree::from_nodes(nodes).leaf_count() == 2);
    nodes[2].depth = 3;
    CHECK_THROWS_AS(Tree::from_nodes(nodes), ModelFormatError);
}
