#include "rgf/synth.hpp"

#include <vector>

#include "rgf/error.hpp"

namespace rgf {

void SynthConfig::validate() const {
    if (q < 1) throw ConfigError("q must be >= 1");
    if (num_target_trees < 1) throw ConfigError("num_target_trees must be >= 1");
    if (dim < 1) throw ConfigError("dim must be >= 1");
    if (n_train < 1 || n_test < 1) throw ConfigError("sample sizes must be >= 1");
}

Forest random_target_forest(const SynthConfig& config, Rng& rng) {
    config.validate();
    Forest forest;
    for (std::size_t k = 0; k < config.num_target_trees; ++k) {
        Tree tree(0.0);
        while (tree.leaf_count() < config.q) {
            const auto leaves = tree.leaves();
            const NodeId leaf = leaves[rng.below(leaves.size())];
            const int feature = static_cast<int>(rng.below(config.dim));
            const double threshold = rng.uniform01();
            tree.split(leaf, feature, threshold, 0.0, 0.0);
        }
        for (NodeId leaf : tree.leaves()) tree.set_weight(leaf, rng.normal());
        forest.add_tree(std::move(tree));
    }
    return forest;
}

namespace {

Dataset draw(std::size_t n, std::size_t dim, const Forest& target, Rng& rng) {
    std::vector<double> features(n * dim);
    for (auto& v : features) v = rng.uniform01();
    Dataset data(n, dim, std::move(features));
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = target.predict(data.row(i));
    data.set_targets(std::move(y));
    return data;
}

}  // namespace

SynthData synthesize(const SynthConfig& config) {
    Rng rng(config.seed);
    SynthData out;
    out.target = random_target_forest(config, rng);
    out.train = draw(config.n_train, config.dim, out.target, rng);
    out.test = draw(config.n_test, config.dim, out.target, rng);
    return out;
}

}  // namespace rgf
