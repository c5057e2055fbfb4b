#pragma once

#include <cstddef>
#include <cstdint>

#include "rgf/dataset.hpp"
#include "rgf/forest.hpp"
#include "rgf/random.hpp"

namespace rgf {

struct SynthConfig {
    std::size_t q = 10;                  // leaves per target tree
    std::size_t num_target_trees = 100;
    std::size_t dim = 10;
    std::size_t n_train = 2000;
    std::size_t n_test = 20000;
    std::uint64_t seed = 1;

    void validate() const;
};

struct SynthData {
    Dataset train;
    Dataset test;
    Forest target;  // the function that produced the targets
};

/// Random regression problem. Each target tree grows by splitting a uniformly
/// chosen leaf on a uniform feature at a uniform threshold in [0, 1) until it
/// has q leaves; its leaf values are then drawn N(0, 1) in leaf-id order.
/// All trees come first, then the training features, then the test features,
/// each uniform on [0, 1). Targets are the sum of the tree outputs.
SynthData synthesize(const SynthConfig& config);

/// Only the target trees (the same ones synthesize() draws for this config).
Forest random_target_forest(const SynthConfig& config, Rng& rng);

}  // namespace rgf
