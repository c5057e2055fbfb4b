#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rgf/correction.hpp"
#include "rgf/dataset.hpp"
#include "rgf/forest.hpp"
#include "rgf/growth.hpp"
#include "rgf/loss.hpp"
#include "rgf/regularizer.hpp"

namespace rgf {

enum class Metric { rmse, accuracy };

Metric parse_metric(std::string_view token);  // rmse | accuracy
std::string_view metric_token(Metric metric);
/// True when a larger score is better.
constexpr bool higher_is_better(Metric metric) { return metric == Metric::accuracy; }

struct TrainerConfig {
    LossKind loss = LossKind::square;
    RegConfig reg;                    // reg.lambda is used for weight correction
    std::optional<double> lambda_g;   // growth-time lambda; reg.lambda if unset
    CorrectionConfig correction;
    GrowthConfig growth;
    std::size_t report_every = 100;   // leaves between report records (0: final only)
    const Dataset* monitor = nullptr; // optional held-out set scored in the report
    Metric metric = Metric::rmse;

    double growth_lambda() const { return lambda_g.value_or(reg.lambda); }
    void validate() const;
};

/// Sets one hyperparameter by its command-line name (without dashes), e.g.
/// "lambda", "lambda-g", "reg", "max-leaf". Throws ConfigError otherwise.
void apply_setting(TrainerConfig& config, std::string_view key, std::string_view value);

/// One configuration per non-empty line: "key=value,key=value", applied on
/// top of `base`. Lines starting with '#' are skipped.
std::vector<TrainerConfig> parse_grid(std::string_view text, const TrainerConfig& base);

struct ReportRecord {
    std::size_t leaves = 0;
    std::size_t trees = 0;
    double objective = 0.0;  // training Q under the correction lambda
    double loss = 0.0;       // training loss
    std::optional<double> monitor;
};

struct TrainReport {
    std::vector<ReportRecord> records;
    std::size_t operations = 0;     // accepted structure changes
    std::size_t corrections = 0;    // correction rounds, the final one included
    std::string stop_reason;        // "max_leaf" | "no_reduction" | "no_descent"
    std::string model_path;         // filled by callers that save the model
};

struct TrainResult {
    Forest forest;
    TrainReport report;
};

/// Regularized greedy forest: alternate the best structure change (scored
/// under the growth lambda) with periodic fully corrective weight updates
/// (under reg.lambda), until the leaf budget is reached or nothing reduces Q.
/// Each accepted change is checked against the exact objective; if its Newton
/// increments would not lower Q they are halved until they do.
TrainResult train_rgf(const Dataset& data, const TrainerConfig& config);

/// Hooks for tests. on_operation gets (Q before, Q after) for every accepted
/// structure change, both under the growth lambda; on_weight_update runs after
/// every coordinate step of weight correction.
struct TrainingObserver {
    std::function<void(double, double)> on_operation;
    WeightUpdateHook on_weight_update;
};
TrainResult train_rgf(const Dataset& data, const TrainerConfig& config, const TrainingObserver& observer);

/// rmse = sqrt(mean (f - y)^2); accuracy = share of instances with
/// (f > 0 ? 1 : -1) == y.
double evaluate(std::span<const double> predictions, std::span<const double> targets, Metric metric);
double evaluate(const Forest& forest, const Dataset& data, Metric metric);
std::vector<double> predict_all(const Forest& forest, const Dataset& data);

/// fold[i] for every instance: shuffle 0..n-1 with Rng(seed), then the
/// instance at shuffled position p goes to fold p % folds.
std::vector<std::size_t> fold_assignment(std::size_t n, std::size_t folds, std::uint64_t seed);

/// Scores every candidate on each held-out fold and averages over folds.
/// `score(train, held_out)` returns one score per candidate.
using FoldScorer = std::function<std::vector<double>(const Dataset&, const Dataset&)>;
std::vector<double> cross_validate_scores(const Dataset& data, std::size_t folds, std::uint64_t seed,
                                          const FoldScorer& score);

/// Index of the best score; ties go to the earliest.
std::size_t best_index(std::span<const double> scores, Metric metric);

struct CVResult {
    std::size_t best = 0;
    std::vector<double> scores;  // mean held-out score per grid entry
};

CVResult cross_validate(const Dataset& data, std::span<const TrainerConfig> grid, std::size_t folds,
                        std::uint64_t seed, Metric metric);

}  // namespace rgf
