#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "rgf/benchmark.hpp"
#include "rgf/error.hpp"
#include "rgf/synth.hpp"

using namespace rgf;

namespace {

SynthConfig small(std::uint64_t seed) {
    SynthConfig c;
    c.q = 10;
    c.num_target_trees = 100;
    c.n_train = 200;
    c.n_test = 50;
    c.seed = seed;
    return c;
}

BenchmarkSpec tiny() {
    BenchmarkSpec s;
    s.q_values = {5};
    s.runs = 1;
    s.n_train = 120;
    s.n_test = 80;
    s.dim = 4;
    s.num_target_trees = 5;
    s.rgf_regs = {RegKind::leaf_l2};
    s.rgf_lambdas = {0.1};
    s.rgf_gammas = {1.0};
    s.rgf_max_leaf = 20;
    s.gbdt_tree_leaves = {5};
    s.gbdt_shrink = {0.1};
    s.gbdt_max_trees = 20;
    s.record_time = false;
    return s;
}

std::vector<double> targets(const Dataset& d) { return {d.targets().begin(), d.targets().end()}; }

}  // namespace

TEST_CASE("target trees have q leaves and features lie in the unit cube") {
    const auto d = synthesize(small(3));
    CHECK(d.target.tree_count() == 100);
    for (const auto& t : d.target.trees()) CHECK(t.leaf_count() == 10);
    CHECK(d.train.size() == 200);
    CHECK(d.test.size() == 50);
    CHECK(d.train.dim() == 10);
    for (std::size_t i = 0; i < d.train.size(); ++i) {
        for (std::size_t j = 0; j < d.train.dim(); ++j) {
            CHECK(d.train.value(i, j) >= 0.0);
            CHECK(d.train.value(i, j) < 1.0);
        }
        CHECK(d.train.targets()[i] == d.target.predict(d.train.row(i)));
    }
}

TEST_CASE("single-leaf target trees give constant targets") {
    SynthConfig c = small(5);
    c.q = 1;
    const auto d = synthesize(c);
    for (double y : d.train.targets()) CHECK(y == d.train.targets()[0]);
    for (double y : d.test.targets()) CHECK(y == d.train.targets()[0]);
}

TEST_CASE("same seed, same data") {
    const auto a = synthesize(small(11));
    const auto b = synthesize(small(11));
    const auto c = synthesize(small(12));
    CHECK(a.target == b.target);
    CHECK(targets(a.train) == targets(b.train));
    CHECK(targets(a.test) == targets(b.test));
    CHECK_FALSE(targets(a.train) == targets(c.train));

    Rng rng(11);
    CHECK(random_target_forest(small(11), rng) == a.target);
}

TEST_CASE("target second moment equals the number of target trees") {
    // each tree contributes an independent N(0, 1) leaf value at any point
    double sum = 0.0;
    std::size_t count = 0;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        const auto d = synthesize(small(seed));
        for (double y : d.train.targets()) {
            sum += y * y;
            ++count;
        }
    }
    CHECK(std::abs(sum / static_cast<double>(count) / 100.0 - 1.0) < 0.1);
}

TEST_CASE("synthesis configuration") {
    SynthConfig c;
    c.q = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.q = 2;
    c.dim = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.dim = 1;
    c.n_test = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("benchmark seeds differ by q and run") {
    CHECK(benchmark_data_seed(1, 5, 0) == benchmark_data_seed(1, 5, 0));
    CHECK(benchmark_data_seed(1, 5, 0) != benchmark_data_seed(1, 5, 1));
    CHECK(benchmark_data_seed(1, 5, 0) != benchmark_data_seed(1, 10, 0));
    CHECK(benchmark_data_seed(1, 5, 0) != benchmark_data_seed(2, 5, 0));
}

TEST_CASE("a tiny benchmark is reproducible") {
    const auto spec = tiny();
    std::size_t streamed = 0;
    const auto rows = run_benchmark(spec, [&](const BenchmarkRow&) { ++streamed; });
    REQUIRE(rows.size() == 2);
    CHECK(streamed == 2);
    CHECK(rows[0].method == "rgf");
    CHECK(rows[0].reg == "L2");
    CHECK(rows[1].method == "gbdt");
    CHECK(rows[1].reg == "-");
    for (const auto& r : rows) {
        CHECK(r.train_seconds == 0.0);
        CHECK(std::isfinite(r.test_rmse));
        CHECK(r.leaves > 0);
    }
    CHECK(rows[0].leaves <= 21);

    const std::string csv = format_csv(rows);
    CHECK(csv.rfind("method,reg,q,run,selected_params,test_rmse,leaves,train_seconds\n", 0) == 0);
    CHECK(format_csv(run_benchmark(spec)) == csv);

    CHECK(mean_rmse(rows, "rgf", "L2", 5) == rows[0].test_rmse);
    CHECK(std::isnan(mean_rmse(rows, "rgf", "MinPen", 5)));
    CHECK_FALSE(format_table(rows).empty());

    BenchmarkSpec bad = spec;
    bad.folds = 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}
