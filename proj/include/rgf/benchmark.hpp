#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rgf/regularizer.hpp"

namespace rgf {

/// Synthetic regression benchmark: for each q and run, synthesize 2K/20K
/// data, choose parameters by cross validation on the training part, refit on
/// all of it and score on the test part.
struct BenchmarkSpec {
    std::vector<std::size_t> q_values{5, 10, 20};
    std::size_t runs = 3;
    std::size_t n_train = 2000;
    std::size_t n_test = 20000;
    std::size_t dim = 10;
    std::size_t num_target_trees = 100;

    std::vector<RegKind> rgf_regs{RegKind::leaf_l2, RegKind::min_penalty, RegKind::min_penalty_sib};
    std::vector<double> rgf_lambdas{1.0, 0.1, 0.01};
    std::vector<double> rgf_gammas{1.0, 2.0};  // crossed with lambda for the min-penalty kinds only
    std::size_t rgf_max_leaf = 3000;

    bool run_gbdt = true;
    std::vector<std::size_t> gbdt_tree_leaves{5, 10, 15, 20, 25};
    std::vector<double> gbdt_shrink{0.5, 0.1, 0.05, 0.01, 0.005, 0.001};
    std::size_t gbdt_max_trees = 2000;  // the tree count is chosen along the path

    std::size_t folds = 2;
    std::uint64_t seed = 1;
    bool record_time = true;  // false writes 0 to train_seconds

    void validate() const;
};

struct BenchmarkRow {
    std::string method;  // rgf | gbdt
    std::string reg;     // L2 | MinPen | MinPenSib | -
    std::size_t q = 0;
    std::size_t run = 0;
    std::string selected_params;  // "key=value;key=value"
    double test_rmse = 0.0;
    std::size_t leaves = 0;
    double train_seconds = 0.0;
};

/// Seed of the synthetic data for (q, run).
std::uint64_t benchmark_data_seed(std::uint64_t seed, std::size_t q, std::size_t run);

std::vector<BenchmarkRow> run_benchmark(const BenchmarkSpec& spec,
                                        const std::function<void(const BenchmarkRow&)>& on_row = {});

/// method,reg,q,run,selected_params,test_rmse,leaves,train_seconds
std::string format_csv(const std::vector<BenchmarkRow>& rows);

/// Mean test RMSE per (method, reg) and q.
std::string format_table(const std::vector<BenchmarkRow>& rows);

/// Mean test RMSE of one (method, reg) at one q; NaN when absent.
double mean_rmse(const std::vector<BenchmarkRow>& rows, const std::string& method, const std::string& reg,
                 std::size_t q);

}  // namespace rgf
