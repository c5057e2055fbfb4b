#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "rgf/boosting.hpp"
#include "rgf/error.hpp"
#include "rgf/synth.hpp"
#include "rgf/trainer.hpp"

using namespace rgf;
using doctest::Approx;

namespace {

Dataset four_points(std::vector<double> y) { return Dataset(4, 1, {0.0, 1.0, 2.0, 3.0}, std::move(y)); }

SynthData toy(std::uint64_t seed, std::size_t n = 300) {
    SynthConfig sc;
    sc.q = 5;
    sc.num_target_trees = 10;
    sc.dim = 5;
    sc.n_train = n;
    sc.n_test = 1;
    sc.seed = seed;
    return synthesize(sc);
}

}  // namespace

TEST_CASE("regression tree base learner") {
    SUBCASE("stump on the four-point example") {
        const Dataset d = four_points({0, 0, 0, 0});
        const SortedFeatureIndex index(d);
        const double y[] = {-0.5, -0.5, 0.5, 0.5};
        const Tree t = fit_regression_tree(d, index, y, 2);
        REQUIRE(t.leaf_count() == 2);
        CHECK(t.node(0).threshold == 1.5);
        CHECK(t.node(t.node(0).left).weight == -0.5);
        CHECK(t.node(t.node(0).right).weight == 0.5);
    }
    SUBCASE("constant targets give one leaf") {
        const Dataset d = four_points({0, 0, 0, 0});
        const SortedFeatureIndex index(d);
        const double y[] = {0.7, 0.7, 0.7, 0.7};
        const Tree t = fit_regression_tree(d, index, y, 5);
        CHECK(t.leaf_count() == 1);
        CHECK(t.node(0).weight == 0.7);
    }
    SUBCASE("four leaves isolate four points") {
        const Dataset d = four_points({0, 0, 0, 0});
        const SortedFeatureIndex index(d);
        const double y[] = {3.0, -1.0, 2.0, 0.5};
        const Tree t = fit_regression_tree(d, index, y, 4);
        CHECK(t.leaf_count() == 4);
        for (std::size_t i = 0; i < 4; ++i) CHECK(t.predict(d.row(i)) == y[i]);
    }
}

TEST_CASE("hand-traced boosting round") {
    const Dataset d = four_points({0, 0, 1, 1});
    GBDTConfig c;
    c.tree_leaves = 2;
    c.shrink = 1.0;
    c.num_trees = 1;
    const auto r = boost(d, c);
    REQUIRE(r.forest.tree_count() == 2);
    CHECK(r.forest.tree(0).node(0).weight == 0.5);
    CHECK(r.rounds.size() == 2);
    CHECK(r.rounds[0].train_loss == Approx(0.125));
    CHECK(r.rounds[1].train_loss == 0.0);
    for (std::size_t i = 0; i < 4; ++i) CHECK(r.forest.predict(d.row(i)) == d.targets()[i]);
}

TEST_CASE("zero shrinkage keeps the bias") {
    const auto data = toy(2);
    GBDTConfig c;
    c.shrink = 0.0;
    c.num_trees = 5;
    const auto r = boost(data.train, c);
    double mean = 0.0;
    for (double y : data.train.targets()) mean += y;
    mean /= static_cast<double>(data.train.size());
    for (std::size_t k = 1; k < r.forest.tree_count(); ++k)
        for (NodeId leaf : r.forest.tree(k).leaves()) CHECK(r.forest.tree(k).node(leaf).weight == 0.0);
    for (const auto& round : r.rounds) CHECK(round.train_loss == Approx(r.rounds[0].train_loss).epsilon(1e-12));
    CHECK(r.forest.predict(data.train.row(0)) == Approx(mean).epsilon(1e-12));
}

TEST_CASE("square-loss training loss never rises") {
    const auto data = toy(3);
    for (BoostVariant v : {BoostVariant::generic, BoostVariant::gbdt, BoostVariant::fully_corrective}) {
        GBDTConfig c;
        c.variant = v;
        c.num_trees = 20;
        c.shrink = 0.3;
        const auto r = boost(data.train, c);
        REQUIRE(r.rounds.size() == 21);
        for (std::size_t k = 1; k < r.rounds.size(); ++k) CHECK(r.rounds[k].train_loss <= r.rounds[k - 1].train_loss + 1e-12);
        CHECK(r.rounds.back().train_loss == Approx(oracle::mean_loss(r.forest, data.train, LossKind::square)).epsilon(1e-10));
    }
}

TEST_CASE("stumps: per-leaf and single step sizes coincide for square loss") {
    const auto data = toy(4);
    GBDTConfig c;
    c.tree_leaves = 2;
    c.num_trees = 15;
    c.shrink = 0.5;
    const auto per_leaf = boost(data.train, c);
    c.variant = BoostVariant::generic;
    const auto single = boost(data.train, c);
    for (std::size_t i = 0; i < data.train.size(); ++i)
        CHECK(std::abs(per_leaf.forest.predict(data.train.row(i)) - single.forest.predict(data.train.row(i))) <= 1e-12);
}

TEST_CASE("fully corrective re-fit of the same trees never loses to gbdt") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto data = toy(seed, 200);
        GBDTConfig c;
        c.num_trees = 2;
        const auto g = boost(data.train, c);
        for (std::size_t k = 1; k <= 2; ++k) {
            Forest prefix;
            for (std::size_t t = 0; t <= k; ++t) prefix.add_tree(g.forest.tree(t));
            const Forest fc = fully_correct(prefix, data.train, LossKind::square, 50);
            CHECK(fc.tree_count() == prefix.tree_count());
            CHECK(oracle::mean_loss(fc, data.train, LossKind::square) <= g.rounds[k].train_loss + 1e-12);
        }
    }
}

TEST_CASE("logistic boosting and the monitor curve") {
    Rng rng(8);
    Dataset d = oracle::random_features(rng, 200, 2, 40);
    std::vector<double> y(200);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = d.value(i, 0) > d.value(i, 1) ? 1.0 : -1.0;
    d.set_targets(y);
    GBDTConfig c;
    c.loss = LossKind::logistic;
    c.num_trees = 30;
    c.shrink = 0.5;
    const auto r = boost(d, c, &d);
    CHECK(r.rounds.back().train_loss < r.rounds.front().train_loss);
    CHECK(r.rounds.back().monitor_rmse.has_value());
    CHECK(evaluate(r.forest, d, Metric::accuracy) > 0.9);
}

TEST_CASE("boosting configuration") {
    GBDTConfig c;
    c.tree_leaves = 1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.tree_leaves = 2;
    c.num_trees = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.num_trees = 1;
    c.shrink = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK(parse_variant("fc") == BoostVariant::fully_corrective);
    CHECK(parse_variant(variant_token(BoostVariant::generic)) == BoostVariant::generic);
    CHECK_THROWS_AS(parse_variant("xgb"), ConfigError);
}
