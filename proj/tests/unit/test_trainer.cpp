#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "rgf/error.hpp"
#include "rgf/synth.hpp"
#include "rgf/trainer.hpp"

using namespace rgf;
using doctest::Approx;

namespace {

TrainerConfig base_config(double lambda, std::size_t max_leaf) {
    TrainerConfig c;
    c.reg.lambda = lambda;
    c.growth.max_leaf = max_leaf;
    c.report_every = 0;
    return c;
}

Dataset checkerboard(const std::vector<std::array<double, 3>>& points) {
    std::vector<double> x, y;
    for (const auto& p : points) {
        x.push_back(p[0]);
        x.push_back(p[1]);
        y.push_back(p[2]);
    }
    return Dataset(points.size(), 2, std::move(x), std::move(y));
}

}  // namespace

TEST_CASE("nothing to learn") {
    SUBCASE("constant features") {
        Dataset d(4, 2, {1, 1, 1, 1, 1, 1, 1, 1}, {2.0, 2.0, 2.0, 2.0});
        const auto r = train_rgf(d, base_config(0.1, 100));
        CHECK(r.forest.leaf_count() == 0);
        CHECK(r.report.stop_reason == "no_reduction");
    }
    SUBCASE("zero targets") {
        Dataset d(4, 1, {0, 1, 2, 3}, {0.0, 0.0, 0.0, 0.0});
        const auto r = train_rgf(d, base_config(0.1, 100));
        CHECK(r.forest.leaf_count() <= 2);
        CHECK(r.report.stop_reason == "no_reduction");
    }
}

TEST_CASE("balanced XOR gives greedy search no first step") {
    const Dataset d = checkerboard({{0, 0, 1}, {0, 1, -1}, {1, 0, -1}, {1, 1, 1}});
    const auto r = train_rgf(d, base_config(0.01, 8));
    CHECK(r.forest.leaf_count() == 0);
    CHECK(r.report.stop_reason == "no_reduction");
}

TEST_CASE("unbalanced checkerboard is fit by depth-two rules") {
    const Dataset d = checkerboard({{0, 0, 1}, {0, 0, 1}, {0, 1, -1}, {1, 0, -1}, {1, 1, 1}});
    TrainerConfig c = base_config(0.01, 8);
    c.correction.interval = 1;
    const auto r = train_rgf(d, c);
    CHECK(r.forest.leaf_count() <= 8);
    CHECK(r.report.records.back().loss < 0.01);
}

TEST_CASE("leaf budget, report records and observer") {
    Rng rng(3);
    Dataset d = oracle::random_features(rng, 300, 4, 40);
    std::vector<double> y(300);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::sin(6 * d.value(i, 0)) + d.value(i, 1) + 0.1 * rng.normal();
    d.set_targets(y);
    TrainerConfig c = base_config(0.01, 101);
    c.report_every = 10;
    c.monitor = &d;
    std::size_t ops = 0;
    TrainingObserver obs;
    obs.on_operation = [&](double before, double after) {
        ++ops;
        CHECK(after < before);
    };
    const auto r = train_rgf(d, c, obs);
    CHECK(r.report.stop_reason == "max_leaf");
    CHECK(r.forest.leaf_count() >= 101);
    CHECK(r.forest.leaf_count() <= 102);
    CHECK(ops == r.report.operations);
    CHECK(r.report.corrections >= 1);
    REQUIRE(r.report.records.size() >= 10);
    for (std::size_t k = 1; k < r.report.records.size(); ++k)
        CHECK(r.report.records[k].leaves >= r.report.records[k - 1].leaves);
    CHECK(r.report.records.back().monitor.has_value());
    CHECK(*r.report.records.back().monitor == Approx(evaluate(r.forest, d, Metric::rmse)));
    CHECK(r.report.records.back().loss == Approx(oracle::mean_loss(r.forest, d, LossKind::square)).epsilon(1e-12));
}

TEST_CASE("growth lambda changes the model") {
    Rng rng(4);
    Dataset d = oracle::random_features(rng, 200, 3, 20);
    std::vector<double> y(200);
    for (auto& v : y) v = rng.normal();
    d.set_targets(y);
    TrainerConfig a = base_config(0.1, 40);
    TrainerConfig b = a;
    b.lambda_g = 0.001;
    CHECK_FALSE(train_rgf(d, a).forest == train_rgf(d, b).forest);
}

TEST_CASE("training is deterministic") {
    SynthConfig sc;
    sc.q = 5;
    sc.n_train = 400;
    sc.n_test = 1;
    sc.seed = 3;
    const auto data = synthesize(sc);
    TrainerConfig c = base_config(0.1, 150);
    c.reg.kind = RegKind::min_penalty_sib;
    c.reg.gamma = 2.0;
    CHECK(serialize(train_rgf(data.train, c).forest) == serialize(train_rgf(data.train, c).forest));
}

TEST_CASE("classification and pairwise losses train") {
    Rng rng(6);
    Dataset d = oracle::random_features(rng, 200, 2, 50);
    std::vector<double> y(200);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = d.value(i, 0) + d.value(i, 1) > 1.0 ? 1.0 : -1.0;
    d.set_targets(y);
    TrainerConfig c = base_config(0.01, 30);
    for (LossKind loss : {LossKind::logistic, LossKind::exponential}) {
        c.loss = loss;
        const auto r = train_rgf(d, c);
        CHECK(evaluate(r.forest, d, Metric::accuracy) > 0.9);
    }

    std::vector<PreferencePair> pairs;
    for (std::uint32_t i = 0; i + 1 < 200; i += 2)
        pairs.push_back(d.value(i, 0) > d.value(i + 1, 0) ? PreferencePair{i, i + 1} : PreferencePair{i + 1, i});
    Dataset ranked(200, 2, std::vector<double>(d.features().begin(), d.features().end()), {}, pairs);
    c.loss = LossKind::pairwise_squared_hinge;
    const auto r = train_rgf(ranked, c);
    CHECK(r.report.records.back().loss < 1.0);
    CHECK_THROWS_AS(train_rgf(d, c), Error);
}

TEST_CASE("invalid training setups") {
    Dataset d(2, 1, {0, 1}, {0.5, 1.0});
    TrainerConfig c = base_config(0.0, 10);
    CHECK_THROWS_AS(train_rgf(d, c), ConfigError);
    c.reg.lambda = 0.1;
    c.lambda_g = -1.0;
    CHECK_THROWS_AS(train_rgf(d, c), ConfigError);
    c.lambda_g.reset();
    c.loss = LossKind::logistic;
    CHECK_THROWS_AS(train_rgf(d, c), Error);
    CHECK_THROWS_AS(train_rgf(Dataset{}, base_config(0.1, 10)), Error);
}

TEST_CASE("evaluation metrics") {
    const double t[] = {1.0, 1.0};
    const double exact[] = {1.0, 1.0};
    const double mixed[] = {1.0, -1.0};
    CHECK(evaluate(exact, t, Metric::rmse) == 0.0);
    CHECK(evaluate(mixed, t, Metric::accuracy) == 0.5);
    const double zero[] = {0.0, 0.0};
    CHECK(evaluate(zero, t, Metric::accuracy) == 0.0);

    Rng rng(10);
    std::vector<double> p(100), y(100);
    double sum = 0.0;
    for (std::size_t i = 0; i < 100; ++i) {
        p[i] = rng.normal();
        y[i] = rng.normal();
        sum += (p[i] - y[i]) * (p[i] - y[i]);
    }
    CHECK(std::abs(evaluate(p, y, Metric::rmse) - std::sqrt(sum / 100.0)) <= 1e-12);
    CHECK(parse_metric("accuracy") == Metric::accuracy);
    CHECK_THROWS_AS(parse_metric("auc"), ConfigError);
}

TEST_CASE("fold assignment") {
    const auto folds = fold_assignment(10, 2, 7);
    CHECK(folds.size() == 10);
    CHECK(std::count(folds.begin(), folds.end(), 0u) == 5);
    CHECK(std::count(folds.begin(), folds.end(), 1u) == 5);
    CHECK(fold_assignment(10, 2, 7) == folds);
    CHECK_FALSE(fold_assignment(10, 2, 8) == folds);
    CHECK_THROWS_AS(fold_assignment(3, 4, 1), ConfigError);
    CHECK_THROWS_AS(fold_assignment(3, 1, 1), ConfigError);

    // every point is scored exactly once
    std::vector<double> ids(10);
    std::iota(ids.begin(), ids.end(), 0.0);
    Dataset tagged(10, 1, ids, ids);
    std::vector<int> seen(10, 0);
    cross_validate_scores(tagged, 2, 7, [&](const Dataset& train, const Dataset& held) {
        CHECK(train.size() + held.size() == 10);
        for (std::size_t i = 0; i < held.size(); ++i) ++seen[static_cast<std::size_t>(held.value(i, 0))];
        return std::vector<double>{0.0};
    });
    for (int s : seen) CHECK(s == 1);
}

TEST_CASE("cross validation") {
    SynthConfig sc;
    sc.q = 5;
    sc.n_train = 300;
    sc.n_test = 2000;
    sc.seed = 12;
    const auto data = synthesize(sc);
    std::vector<TrainerConfig> grid;
    for (double lambda : {1.0, 0.1, 0.01}) grid.push_back(base_config(lambda, 200));

    const auto one = cross_validate(data.train, std::span(grid).first(1), 2, 1, Metric::rmse);
    CHECK(one.best == 0);
    CHECK(one.scores.size() == 1);

    const auto cv = cross_validate(data.train, grid, 2, 1, Metric::rmse);
    REQUIRE(cv.scores.size() == 3);
    CHECK(cv.scores[cv.best] == *std::min_element(cv.scores.begin(), cv.scores.end()));
    double worst = 0.0;
    for (const auto& c : grid) worst = std::max(worst, evaluate(train_rgf(data.train, c).forest, data.test, Metric::rmse));
    CHECK(evaluate(train_rgf(data.train, grid[cv.best]).forest, data.test, Metric::rmse) <= worst);

    const double tied[] = {0.5, 0.5, 0.7};
    CHECK(best_index(tied, Metric::rmse) == 0);
    CHECK(best_index(tied, Metric::accuracy) == 2);
}

TEST_CASE("settings and grids") {
    TrainerConfig c;
    apply_setting(c, "reg", "MinPen");
    apply_setting(c, "lambda-g", "0.001");
    apply_setting(c, "recent-trees", "all");
    apply_setting(c, "opt-interval", "50");
    CHECK(c.reg.kind == RegKind::min_penalty);
    CHECK(*c.lambda_g == 0.001);
    CHECK(c.growth.recent_trees == kAllTrees);
    CHECK(c.correction.interval == 50);
    CHECK_THROWS_AS(apply_setting(c, "depth", "3"), ConfigError);
    CHECK_THROWS_AS(apply_setting(c, "lambda", "abc"), ConfigError);
    CHECK_THROWS_AS(apply_setting(c, "max-leaf", "-4"), ConfigError);

    const auto grid = parse_grid("# lambdas\nlambda=1\n\nlambda=0.1, reg=MinPenSib\n", TrainerConfig{});
    REQUIRE(grid.size() == 2);
    CHECK(grid[1].reg.lambda == 0.1);
    CHECK(grid[1].reg.kind == RegKind::min_penalty_sib);
    try {
        parse_grid("lambda=1\nmax-leaf\n", TrainerConfig{});
        FAIL("expected an error");
    } catch (const DataError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse_grid("# only a comment\n", TrainerConfig{}), ConfigError);
}

TEST_CASE("held-out error falls then flattens as the forest grows") {
    SynthConfig sc;
    sc.q = 10;
    sc.n_train = 2000;
    sc.n_test = 5000;
    sc.seed = 5;
    const auto data = synthesize(sc);
    TrainerConfig c = base_config(0.1, 2000);
    c.report_every = 100;
    c.monitor = &data.test;
    const auto r = train_rgf(data.train, c);
    const auto& recs = r.report.records;
    REQUIRE(recs.size() >= 20);
    auto at = [&](std::size_t leaves) {
        for (const auto& rec : recs)
            if (rec.leaves >= leaves) return *rec.monitor;
        return *recs.back().monitor;
    };
    const double early_gain = at(100) - at(1000);
    const double late_gain = at(1000) - *recs.back().monitor;
    CHECK(early_gain > 0.0);
    CHECK(late_gain < early_gain);
    CHECK(*recs.back().monitor < *recs.front().monitor);
}
