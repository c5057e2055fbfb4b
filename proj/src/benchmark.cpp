#include "rgf/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "rgf/boosting.hpp"
#include "rgf/dataset.hpp"
#include "rgf/error.hpp"
#include "rgf/random.hpp"
#include "rgf/synth.hpp"
#include "rgf/trainer.hpp"

namespace rgf {

void BenchmarkSpec::validate() const {
    if (q_values.empty() || runs == 0) throw ConfigError("benchmark needs q values and runs");
    if (rgf_regs.empty() || rgf_lambdas.empty() || rgf_gammas.empty()) throw ConfigError("RGF grid is empty");
    if (run_gbdt && (gbdt_tree_leaves.empty() || gbdt_shrink.empty() || gbdt_max_trees == 0))
        throw ConfigError("GBDT grid is empty");
    if (folds < 2) throw ConfigError("folds must be >= 2");
}

std::uint64_t benchmark_data_seed(std::uint64_t seed, std::size_t q, std::size_t run) {
    std::uint64_t state = seed;
    std::uint64_t mixed = splitmix64(state);
    state = mixed ^ (static_cast<std::uint64_t>(q) << 32) ^ static_cast<std::uint64_t>(run);
    return splitmix64(state);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

BenchmarkRow run_rgf(const SynthData& data, const BenchmarkSpec& spec, RegKind reg, std::uint64_t cv_seed) {
    std::vector<TrainerConfig> grid;
    const std::vector<double> unit_gamma{1.0};
    const auto& gammas = reg == RegKind::leaf_l2 ? unit_gamma : spec.rgf_gammas;
    for (double gamma : gammas) {
        for (double lambda : spec.rgf_lambdas) {
            TrainerConfig c;
            c.loss = LossKind::square;
            c.reg.kind = reg;
            c.reg.lambda = lambda;
            c.reg.gamma = gamma;
            c.growth.max_leaf = spec.rgf_max_leaf;
            c.report_every = 0;
            grid.push_back(c);
        }
    }
    const auto cv = cross_validate(data.train, grid, spec.folds, cv_seed, Metric::rmse);
    const auto start = Clock::now();
    const auto fit = train_rgf(data.train, grid[cv.best]);
    BenchmarkRow row;
    row.train_seconds = spec.record_time ? seconds_since(start) : 0.0;
    row.method = "rgf";
    row.reg = std::string(reg_token(reg));
    row.selected_params = "lambda=" + format_double(grid[cv.best].reg.lambda);
    if (reg != RegKind::leaf_l2) row.selected_params += ";gamma=" + format_double(grid[cv.best].reg.gamma);
    row.test_rmse = evaluate(fit.forest, data.test, Metric::rmse);
    row.leaves = fit.forest.leaf_count();
    return row;
}

BenchmarkRow run_gbdt(const SynthData& data, const BenchmarkSpec& spec, std::uint64_t cv_seed) {
    struct Setting {
        std::size_t leaves;
        double shrink;
    };
    std::vector<Setting> settings;
    for (auto j : spec.gbdt_tree_leaves)
        for (auto s : spec.gbdt_shrink) settings.push_back({j, s});
    const std::size_t path = spec.gbdt_max_trees;

    // One candidate per (setting, tree count), read off the held-out curve.
    const auto scores = cross_validate_scores(data.train, spec.folds, cv_seed, [&](const Dataset& train,
                                                                                   const Dataset& held) {
        std::vector<double> out;
        out.reserve(settings.size() * path);
        for (const auto& setting : settings) {
            GBDTConfig config;
            config.tree_leaves = setting.leaves;
            config.shrink = setting.shrink;
            config.num_trees = path;
            const auto fit = boost(train, config, &held);
            for (std::size_t k = 1; k <= path; ++k) out.push_back(*fit.rounds[k].monitor_rmse);
        }
        return out;
    });
    const std::size_t best = best_index(scores, Metric::rmse);
    const Setting& chosen = settings[best / path];
    const std::size_t trees = best % path + 1;

    GBDTConfig config;
    config.tree_leaves = chosen.leaves;
    config.shrink = chosen.shrink;
    config.num_trees = trees;
    const auto start = Clock::now();
    const auto fit = boost(data.train, config);
    BenchmarkRow row;
    row.train_seconds = spec.record_time ? seconds_since(start) : 0.0;
    row.method = "gbdt";
    row.reg = "-";
    row.selected_params = "J=" + std::to_string(chosen.leaves) + ";s=" + format_double(chosen.shrink) +
                          ";K=" + std::to_string(trees);
    row.test_rmse = evaluate(fit.forest, data.test, Metric::rmse);
    row.leaves = fit.forest.leaf_count();
    return row;
}

}  // namespace

std::vector<BenchmarkRow> run_benchmark(const BenchmarkSpec& spec,
                                        const std::function<void(const BenchmarkRow&)>& on_row) {
    spec.validate();
    std::vector<BenchmarkRow> rows;
    auto emit = [&](BenchmarkRow row, std::size_t q, std::size_t run) {
        row.q = q;
        row.run = run;
        if (on_row) on_row(row);
        rows.push_back(std::move(row));
    };
    for (auto q : spec.q_values) {
        for (std::size_t run = 0; run < spec.runs; ++run) {
            SynthConfig sc;
            sc.q = q;
            sc.num_target_trees = spec.num_target_trees;
            sc.dim = spec.dim;
            sc.n_train = spec.n_train;
            sc.n_test = spec.n_test;
            sc.seed = benchmark_data_seed(spec.seed, q, run);
            const auto data = synthesize(sc);
            const std::uint64_t cv_seed = sc.seed + 1;
            for (auto reg : spec.rgf_regs) emit(run_rgf(data, spec, reg, cv_seed), q, run);
            if (spec.run_gbdt) emit(run_gbdt(data, spec, cv_seed), q, run);
        }
    }
    return rows;
}

std::string format_csv(const std::vector<BenchmarkRow>& rows) {
    std::ostringstream out;
    out << "method,reg,q,run,selected_params,test_rmse,leaves,train_seconds\n";
    for (const auto& r : rows) {
        out << r.method << ',' << r.reg << ',' << r.q << ',' << r.run << ',' << r.selected_params << ','
            << format_double(r.test_rmse) << ',' << r.leaves << ',' << format_double(r.train_seconds) << '\n';
    }
    return out.str();
}

double mean_rmse(const std::vector<BenchmarkRow>& rows, const std::string& method, const std::string& reg,
                 std::size_t q) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& r : rows) {
        if (r.method == method && r.reg == reg && r.q == q) {
            sum += r.test_rmse;
            ++count;
        }
    }
    return count ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
}

std::string format_table(const std::vector<BenchmarkRow>& rows) {
    std::vector<std::size_t> qs;
    std::vector<std::pair<std::string, std::string>> methods;
    for (const auto& r : rows) {
        if (std::find(qs.begin(), qs.end(), r.q) == qs.end()) qs.push_back(r.q);
        const std::pair key{r.method, r.reg};
        if (std::find(methods.begin(), methods.end(), key) == methods.end()) methods.push_back(key);
    }
    std::ostringstream out;
    out << std::left << std::setw(18) << "method";
    for (auto q : qs) out << std::right << std::setw(10) << ("q=" + std::to_string(q));
    out << '\n';
    for (const auto& [method, reg] : methods) {
        out << std::left << std::setw(18) << (reg == "-" ? method : method + "-" + reg);
        for (auto q : qs) out << std::right << std::setw(10) << std::fixed << std::setprecision(4) << mean_rmse(rows, method, reg, q);
        out << '\n';
    }
    return out.str();
}

}  // namespace rgf
