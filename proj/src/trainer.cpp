#include "rgf/trainer.hpp"

#include <array>
#include <cassert>
#include <cmath>
#include <numeric>

#include "rgf/error.hpp"
#include "rgf/random.hpp"
#include "rgf/training_state.hpp"
#include "text_util.hpp"

namespace rgf {

Metric parse_metric(std::string_view token) {
    if (token == "rmse") return Metric::rmse;
    if (token == "accuracy") return Metric::accuracy;
    throw ConfigError("unknown metric '" + std::string(token) + "' (expected rmse or accuracy)");
}

std::string_view metric_token(Metric metric) { return metric == Metric::rmse ? "rmse" : "accuracy"; }

void TrainerConfig::validate() const {
    reg.validate();
    if (!(reg.lambda > 0.0)) throw ConfigError("lambda must be > 0");
    if (!(growth_lambda() > 0.0)) throw ConfigError("lambda-g must be > 0");
    correction.validate();
    growth.validate();
}

namespace {

double number(std::string_view key, std::string_view value) {
    const auto v = detail::parse_double(value);
    if (!v || !std::isfinite(*v)) throw ConfigError("bad value for " + std::string(key) + ": '" + std::string(value) + "'");
    return *v;
}

template <typename Int>
Int integer(std::string_view key, std::string_view value) {
    const auto v = detail::parse_int<Int>(value);
    if (!v) throw ConfigError("bad value for " + std::string(key) + ": '" + std::string(value) + "'");
    return *v;
}

}  // namespace

void apply_setting(TrainerConfig& config, std::string_view key, std::string_view value) {
    if (key == "loss") config.loss = parse_loss(value);
    else if (key == "reg") config.reg.kind = parse_reg(value);
    else if (key == "lambda") config.reg.lambda = number(key, value);
    else if (key == "lambda-g") config.lambda_g = number(key, value);
    else if (key == "gamma") config.reg.gamma = number(key, value);
    else if (key == "reg-tol") config.reg.tol = number(key, value);
    else if (key == "reg-max-iter") config.reg.max_iter = integer<int>(key, value);
    else if (key == "max-leaf") config.growth.max_leaf = integer<std::size_t>(key, value);
    else if (key == "recent-trees")
        config.growth.recent_trees = value == "all" ? kAllTrees : integer<std::size_t>(key, value);
    else if (key == "min-node") config.growth.min_node_instances = integer<std::size_t>(key, value);
    else if (key == "eta") config.correction.eta = number(key, value);
    else if (key == "opt-interval") config.correction.interval = integer<std::size_t>(key, value);
    else if (key == "opt-passes") config.correction.passes = integer<int>(key, value);
    else if (key == "report-every") config.report_every = integer<std::size_t>(key, value);
    else throw ConfigError("unknown setting '" + std::string(key) + "'");
}

std::vector<TrainerConfig> parse_grid(std::string_view text, const TrainerConfig& base) {
    std::vector<TrainerConfig> grid;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto end = text.find('\n');
        std::string_view line = detail::trim(text.substr(0, end));
        text = end == std::string_view::npos ? std::string_view{} : text.substr(end + 1);
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        TrainerConfig config = base;
        while (!line.empty()) {
            const auto comma = line.find(',');
            const std::string_view item = detail::trim(line.substr(0, comma));
            line = comma == std::string_view::npos ? std::string_view{} : line.substr(comma + 1);
            if (item.empty()) continue;
            const auto eq = item.find('=');
            if (eq == std::string_view::npos)
                throw DataError("<grid>", line_no, "expected key=value, got '" + std::string(item) + "'");
            try {
                apply_setting(config, detail::trim(item.substr(0, eq)), detail::trim(item.substr(eq + 1)));
            } catch (const ConfigError& e) {
                throw DataError("<grid>", line_no, e.what());
            }
        }
        grid.push_back(config);
    }
    if (grid.empty()) throw ConfigError("grid has no configurations");
    return grid;
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct Candidate {
    std::vector<std::uint32_t> left;
    std::vector<std::uint32_t> right;
    SplitPenaltyModel penalty;
};

Candidate prepare(const TrainingState& state, const StructureOp& op) {
    Candidate c;
    const auto instances =
        op.kind == OpKind::split_leaf ? state.members(op.tree, op.leaf) : state.all_instances();
    const auto feature = static_cast<std::size_t>(op.feature);
    for (auto i : instances) (state.data().value(i, feature) <= op.threshold ? c.left : c.right).push_back(i);
    if (op.kind == OpKind::split_leaf) {
        c.penalty = state.regularizer(op.tree).split_model(state.forest().tree(op.tree), op.leaf);
    } else {
        const Tree root(0.0);
        c.penalty = TreeRegularizer(root, state.reg()).split_model(root, Tree::root());
    }
    return c;
}

double exact_change(const TrainingState& state, const Candidate& c, double d1, double d2, double lambda) {
    const std::array<std::span<const std::uint32_t>, 2> groups{c.left, c.right};
    const std::array<double, 2> shifts{d1, d2};
    return state.objective().shifted_change(state.outputs(), groups, shifts) + lambda * c.penalty.delta(d1, d2);
}

constexpr int kMaxHalvings = 30;

}  // namespace

TrainResult train_rgf(const Dataset& data, const TrainerConfig& config) { return train_rgf(data, config, {}); }

TrainResult train_rgf(const Dataset& data, const TrainerConfig& config, const TrainingObserver& observer) {
    config.validate();
    if (data.empty()) throw ConfigError("training data is empty");
    if (is_pairwise(config.loss) ? !data.has_pairs() : !data.has_targets())
        throw ConfigError(is_pairwise(config.loss) ? "pairwise loss needs preference pairs" : "training data has no targets");
    if (is_margin_loss(config.loss) && !data.has_binary_labels())
        throw ConfigError("loss " + std::string(loss_token(config.loss)) + " needs labels in {+1, -1}");

    const SortedFeatureIndex index(data);
    TrainingState state(data, config.loss, config.reg);
    Grower grower(index, config.growth);
    const double lambda = config.reg.lambda;
    const double lambda_g = config.growth_lambda();

    TrainReport report;
    std::size_t since_correction = 0;
    std::size_t next_report = config.report_every;

    auto record = [&] {
        ReportRecord r;
        r.leaves = state.forest().leaf_count();
        r.trees = state.forest().tree_count();
        r.loss = state.loss();
        r.objective = r.loss + state.penalty(lambda);
        if (config.monitor) r.monitor = evaluate(state.forest(), *config.monitor, config.metric);
        report.records.push_back(r);
    };
    auto correct = [&] {
        correct_weights(state, config.correction, lambda, observer.on_weight_update);
        ++report.corrections;
        since_correction = 0;
    };

    report.stop_reason = "max_leaf";
    while (state.forest().leaf_count() < config.growth.max_leaf) {
        auto op = grower.best_operation(state, lambda_g);
        if (!op) {
            report.stop_reason = "no_reduction";
            break;
        }
        const Candidate candidate = prepare(state, *op);
        int halvings = 0;
        while (!(exact_change(state, candidate, op->delta_left, op->delta_right, lambda_g) < 0.0) &&
               halvings < kMaxHalvings) {
            op->delta_left *= 0.5;
            op->delta_right *= 0.5;
            ++halvings;
        }
        if (halvings == kMaxHalvings) {
            report.stop_reason = "no_descent";
            break;
        }
        const double before = observer.on_operation ? state.objective_value(lambda_g) : 0.0;
        grower.apply(state, *op);
        if (observer.on_operation) observer.on_operation(before, state.objective_value(lambda_g));
        ++report.operations;
        since_correction += op->kind == OpKind::split_leaf ? 1 : 2;

        if (should_correct(since_correction, config.correction)) correct();
        if (config.report_every > 0 && state.forest().leaf_count() >= next_report) {
            record();
            while (next_report <= state.forest().leaf_count()) next_report += config.report_every;
        }
    }
    if (!state.forest().empty()) correct();
    assert(state.output_drift() < 1e-6);
    record();

    return {state.forest(), std::move(report)};
}

// ---------------------------------------------------------------------------
// Evaluation and cross validation

std::vector<double> predict_all(const Forest& forest, const Dataset& data) {
    std::vector<double> out(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) out[i] = forest.predict(data.row(i));
    return out;
}

double evaluate(std::span<const double> predictions, std::span<const double> targets, Metric metric) {
    if (predictions.size() != targets.size()) throw ConfigError("prediction/target count mismatch");
    if (targets.empty()) throw ConfigError("nothing to evaluate");
    if (metric == Metric::rmse) {
        double sum = 0.0;
        for (std::size_t i = 0; i < targets.size(); ++i) {
            const double r = predictions[i] - targets[i];
            sum += r * r;
        }
        return std::sqrt(sum / static_cast<double>(targets.size()));
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i] != 1.0 && targets[i] != -1.0) throw ConfigError("accuracy needs labels in {+1, -1}");
        hits += (predictions[i] > 0.0 ? 1.0 : -1.0) == targets[i];
    }
    return static_cast<double>(hits) / static_cast<double>(targets.size());
}

double evaluate(const Forest& forest, const Dataset& data, Metric metric) {
    return evaluate(predict_all(forest, data), data.targets(), metric);
}

std::vector<std::size_t> fold_assignment(std::size_t n, std::size_t folds, std::uint64_t seed) {
    if (folds < 2) throw ConfigError("folds must be >= 2");
    if (folds > n) throw ConfigError("more folds than instances");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    shuffle(order, rng);
    std::vector<std::size_t> fold(n);
    for (std::size_t p = 0; p < n; ++p) fold[order[p]] = p % folds;
    return fold;
}

std::vector<double> cross_validate_scores(const Dataset& data, std::size_t folds, std::uint64_t seed,
                                          const FoldScorer& score) {
    const auto fold = fold_assignment(data.size(), folds, seed);
    std::vector<double> total;
    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<std::uint32_t> train_rows;
        std::vector<std::uint32_t> held_rows;
        for (std::size_t i = 0; i < data.size(); ++i)
            (fold[i] == f ? held_rows : train_rows).push_back(static_cast<std::uint32_t>(i));
        const auto scores = score(data.subset(train_rows), data.subset(held_rows));
        if (f == 0) total.assign(scores.size(), 0.0);
        if (scores.size() != total.size()) throw ConfigError("fold scorer returned inconsistent candidate counts");
        for (std::size_t k = 0; k < scores.size(); ++k) total[k] += scores[k];
    }
    for (auto& t : total) t /= static_cast<double>(folds);
    return total;
}

std::size_t best_index(std::span<const double> scores, Metric metric) {
    if (scores.empty()) throw ConfigError("no scores to choose from");
    std::size_t best = 0;
    for (std::size_t k = 1; k < scores.size(); ++k) {
        const bool better = higher_is_better(metric) ? scores[k] > scores[best] : scores[k] < scores[best];
        if (better) best = k;
    }
    return best;
}

CVResult cross_validate(const Dataset& data, std::span<const TrainerConfig> grid, std::size_t folds,
                        std::uint64_t seed, Metric metric) {
    if (grid.empty()) throw ConfigError("empty configuration grid");
    if (!data.has_targets()) throw ConfigError("cross validation needs target values");
    CVResult result;
    result.scores = cross_validate_scores(data, folds, seed, [&](const Dataset& train, const Dataset& held) {
        std::vector<double> scores;
        for (const auto& config : grid) {
            TrainerConfig c = config;
            c.monitor = nullptr;
            scores.push_back(evaluate(train_rgf(train, c).forest, held, metric));
        }
        return scores;
    });
    result.best = best_index(result.scores, metric);
    return result;
}

}  // namespace rgf
