#include "rgf/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <optional>
#include <sstream>

#include "rgf/benchmark.hpp"
#include "rgf/boosting.hpp"
#include "rgf/dataset.hpp"
#include "rgf/error.hpp"
#include "rgf/forest.hpp"
#include "rgf/synth.hpp"
#include "rgf/trainer.hpp"
#include "text_util.hpp"

namespace rgf {

namespace {

constexpr std::array kSubcommands{"train", "predict", "eval", "cv", "synth", "gbdt", "bench"};

struct DataFlags {
    std::string features;
    std::string targets;
    std::string format = "dense";
    std::string target_format = "values";
    std::optional<std::size_t> dim;

    void add(CLI::App& app, bool targets_required) {
        app.add_option("--data", features, "feature file")->required();
        auto* t = app.add_option("--targets", targets, "target file (values or pairs)");
        if (targets_required) t->required();
        app.add_option("--format", format, "feature format")->check(CLI::IsMember({"dense", "sparse"}));
        app.add_option("--target-format", target_format, "target file format")
            ->check(CLI::IsMember({"values", "pairs"}));
        app.add_option("--dim", dim, "feature count for sparse files");
    }

    LoadOptions options() const {
        LoadOptions o;
        o.features = format == "sparse" ? FeatureFormat::sparse : FeatureFormat::dense;
        o.targets = target_format == "pairs" ? TargetFormat::pairs : TargetFormat::values;
        o.dim = dim;
        return o;
    }

    Dataset load() const { return load_dataset(features, targets, options()); }
};

/// Hyperparameters as strings, applied through apply_setting so the command
/// line and grid files share one vocabulary.
struct TrainFlags {
    std::vector<std::pair<std::string, std::string>> given;
    std::string metric = "rmse";

    void add(CLI::App& app) {
        static constexpr std::array keys{
            std::pair{"loss", "LS | Log | Expo | L1L2 | PairSqHinge"},
            std::pair{"reg", "L2 | MinPen | MinPenSib"},
            std::pair{"lambda", "regularization strength for weight correction"},
            std::pair{"lambda-g", "regularization strength for forest growing (default: lambda)"},
            std::pair{"gamma", "depth factor of the min-penalty regularizers, >= 1"},
            std::pair{"reg-tol", "min-penalty fixed-point tolerance"},
            std::pair{"reg-max-iter", "min-penalty fixed-point sweep cap"},
            std::pair{"max-leaf", "total leaf budget"},
            std::pair{"recent-trees", "search leaves of the newest N trees (or 'all')"},
            std::pair{"min-node", "minimum instances per new leaf"},
            std::pair{"eta", "correction step damping in (0, 1]"},
            std::pair{"opt-interval", "new leaves between weight corrections"},
            std::pair{"opt-passes", "coordinate sweeps per correction"},
            std::pair{"report-every", "leaves between report lines"},
        };
        for (const auto& [key, help] : keys) {
            const std::string name = key;
            app.add_option_function<std::string>(
                "--" + name, [this, name](const std::string& v) { given.emplace_back(name, v); }, help);
        }
        app.add_option("--metric", metric, "rmse | accuracy")->check(CLI::IsMember({"rmse", "accuracy"}));
    }

    TrainerConfig config() const {
        TrainerConfig c;
        for (const auto& [k, v] : given) apply_setting(c, k, v);
        c.metric = parse_metric(metric);
        return c;
    }
};

void write_lines(const std::string& path, std::span<const double> values) {
    std::string text;
    for (double v : values) text += format_double(v) + '\n';
    detail::write_file(path, text);
}

int cmd_train(const DataFlags& data_flags, const TrainFlags& train_flags, const std::string& model_out,
              const std::string& monitor_data, const std::string& monitor_targets, std::ostream& out) {
    const Dataset data = data_flags.load();
    TrainerConfig config = train_flags.config();
    std::optional<Dataset> monitor;
    if (!monitor_data.empty()) {
        if (monitor_targets.empty()) throw ConfigError("--monitor-data needs --monitor-targets");
        LoadOptions o = data_flags.options();
        o.targets = TargetFormat::values;
        if (!o.dim) o.dim = data.dim();
        monitor = load_dataset(monitor_data, monitor_targets, o);
        config.monitor = &*monitor;
    }
    auto result = train_rgf(data, config);
    save_model(result.forest, model_out);
    result.report.model_path = model_out;
    for (const auto& r : result.report.records) {
        out << "leaves " << r.leaves << " trees " << r.trees << " objective " << format_double(r.objective)
            << " loss " << format_double(r.loss);
        if (r.monitor) out << ' ' << metric_token(config.metric) << ' ' << format_double(*r.monitor);
        out << '\n';
    }
    out << "stop " << result.report.stop_reason << " model " << model_out << '\n';
    return 0;
}

int cmd_predict(const DataFlags& data_flags, const std::string& model, const std::string& out_path,
                std::ostream& out) {
    const Forest forest = load_model(model);
    const Dataset data = data_flags.load();
    const auto predictions = predict_all(forest, data);
    if (out_path.empty()) {
        for (double p : predictions) out << format_double(p) << '\n';
    } else {
        write_lines(out_path, predictions);
    }
    return 0;
}

int cmd_eval(const std::string& pred, const std::string& targets, const std::string& metric, std::ostream& out) {
    const auto p = parse_targets(detail::read_file(pred), pred);
    const auto y = parse_targets(detail::read_file(targets), targets);
    if (p.size() != y.size()) throw DataError("prediction/target count mismatch");
    const Metric m = parse_metric(metric);
    out << metric_token(m) << ' ' << format_double(evaluate(p, y, m)) << '\n';
    return 0;
}

int cmd_cv(const DataFlags& data_flags, const TrainFlags& train_flags, const std::string& grid_path,
           std::size_t folds, std::uint64_t seed, std::ostream& out) {
    const Dataset data = data_flags.load();
    const TrainerConfig base = train_flags.config();
    std::vector<TrainerConfig> grid{base};
    std::vector<std::string> lines{"(base)"};
    if (!grid_path.empty()) {
        const std::string text = detail::read_file(grid_path);
        grid = parse_grid(text, base);
        lines.clear();
        std::istringstream in(text);
        for (std::string line; std::getline(in, line);) {
            const auto t = detail::trim(line);
            if (!t.empty() && t.front() != '#') lines.emplace_back(t);
        }
    }
    const auto result = cross_validate(data, grid, folds, seed, base.metric);
    for (std::size_t k = 0; k < grid.size(); ++k)
        out << "config " << k << ' ' << lines[k] << ' ' << metric_token(base.metric) << ' '
            << format_double(result.scores[k]) << '\n';
    out << "best " << result.best << ' ' << lines[result.best] << '\n';
    return 0;
}

int cmd_synth(const SynthConfig& config, const std::string& prefix, std::ostream& out) {
    const auto data = synthesize(config);
    write_dense_features(data.train, prefix + ".train.x");
    write_targets(data.train.targets(), prefix + ".train.y");
    write_dense_features(data.test, prefix + ".test.x");
    write_targets(data.test.targets(), prefix + ".test.y");
    save_model(data.target, prefix + ".target.model");
    out << "wrote " << prefix << ".{train,test}.{x,y} and " << prefix << ".target.model\n";
    return 0;
}

int cmd_gbdt(const DataFlags& data_flags, GBDTConfig config, const std::string& loss, const std::string& variant,
             const std::string& model_out, const std::string& monitor_data, const std::string& monitor_targets,
             std::ostream& out) {
    config.loss = parse_loss(loss);
    config.variant = parse_variant(variant);
    const Dataset data = data_flags.load();
    std::optional<Dataset> monitor;
    if (!monitor_data.empty()) {
        if (monitor_targets.empty()) throw ConfigError("--monitor-data needs --monitor-targets");
        LoadOptions o = data_flags.options();
        o.targets = TargetFormat::values;
        if (!o.dim) o.dim = data.dim();
        monitor = load_dataset(monitor_data, monitor_targets, o);
    }
    const auto result = boost(data, config, monitor ? &*monitor : nullptr);
    save_model(result.forest, model_out);
    const auto& last = result.rounds.back();
    out << "trees " << last.trees << " loss " << format_double(last.train_loss);
    if (last.monitor_rmse) out << " rmse " << format_double(*last.monitor_rmse);
    out << " model " << model_out << '\n';
    return 0;
}

int cmd_bench(const BenchmarkSpec& spec, const std::string& csv_path, std::ostream& out) {
    const auto rows = run_benchmark(spec, [&](const BenchmarkRow& r) {
        out << "q=" << r.q << " run=" << r.run << ' ' << r.method << (r.reg == "-" ? "" : "-" + r.reg)
            << " rmse " << format_double(r.test_rmse) << " (" << r.selected_params << ")\n"
            << std::flush;
    });
    const std::string csv = format_csv(rows);
    if (csv_path.empty()) out << csv;
    else detail::write_file(csv_path, csv);
    out << format_table(rows);
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    if (!args.empty() && !args[0].empty() && args[0][0] != '-' &&
        std::find(kSubcommands.begin(), kSubcommands.end(), args[0]) == kSubcommands.end()) {
        err << "rgf: unknown subcommand '" << args[0] << "' (try rgf --help)\n";
        return 2;
    }

    CLI::App app{"Regularized greedy forest: training, prediction and baselines", "rgf"};
    app.require_subcommand(1);

    // train
    DataFlags train_data;
    TrainFlags train_flags;
    std::string model_out;
    std::string monitor_data;
    std::string monitor_targets;
    auto* train = app.add_subcommand("train", "fit a regularized greedy forest");
    train_data.add(*train, true);
    train_flags.add(*train);
    train->add_option("--model-out", model_out, "model file to write")->required();
    train->add_option("--monitor-data", monitor_data, "held-out features scored while training");
    train->add_option("--monitor-targets", monitor_targets, "held-out targets");

    // predict
    DataFlags predict_data;
    std::string model_in;
    std::string pred_out;
    auto* predict = app.add_subcommand("predict", "score a feature file with a saved model");
    predict_data.add(*predict, false);
    predict->add_option("--model", model_in, "model file")->required();
    predict->add_option("--out", pred_out, "prediction file (default: stdout)");

    // eval
    std::string eval_pred;
    std::string eval_targets;
    std::string eval_metric = "rmse";
    auto* eval = app.add_subcommand("eval", "compare predictions with targets");
    eval->add_option("--pred", eval_pred, "prediction file")->required();
    eval->add_option("--targets", eval_targets, "target file")->required();
    eval->add_option("--metric", eval_metric, "rmse | accuracy")->check(CLI::IsMember({"rmse", "accuracy"}));

    // cv
    DataFlags cv_data;
    TrainFlags cv_flags;
    std::string grid_path;
    std::size_t folds = 2;
    std::uint64_t cv_seed = 1;
    auto* cv = app.add_subcommand("cv", "choose hyperparameters by k-fold cross validation");
    cv_data.add(*cv, true);
    cv_flags.add(*cv);
    cv->add_option("--grid", grid_path, "one key=value,... configuration per line");
    cv->add_option("--folds", folds, "fold count")->check(CLI::PositiveNumber);
    cv->add_option("--seed", cv_seed, "fold shuffle seed");

    // synth
    SynthConfig synth_config;
    std::string synth_prefix;
    auto* synth = app.add_subcommand("synth", "write a random regression problem");
    synth->add_option("--q", synth_config.q, "leaves per target tree");
    synth->add_option("--target-trees", synth_config.num_target_trees, "trees in the target function");
    synth->add_option("--dim", synth_config.dim, "feature count");
    synth->add_option("--n-train", synth_config.n_train, "training instances");
    synth->add_option("--n-test", synth_config.n_test, "test instances");
    synth->add_option("--seed", synth_config.seed, "generator seed");
    synth->add_option("--out", synth_prefix, "output path prefix")->required();

    // gbdt
    DataFlags gbdt_data;
    GBDTConfig gbdt_config;
    std::string gbdt_loss = "LS";
    std::string gbdt_variant = "gbdt";
    std::string gbdt_model;
    std::string gbdt_monitor_data;
    std::string gbdt_monitor_targets;
    auto* gbdt = app.add_subcommand("gbdt", "gradient boosting baselines");
    gbdt_data.add(*gbdt, true);
    gbdt->add_option("--loss", gbdt_loss, "LS | Log | Expo | L1L2 | PairSqHinge");
    gbdt->add_option("--variant", gbdt_variant, "generic | gbdt | fc");
    gbdt->add_option("--tree-leaves", gbdt_config.tree_leaves, "leaves per tree (J)");
    gbdt->add_option("--num-trees", gbdt_config.num_trees, "boosting rounds (K)");
    gbdt->add_option("--shrink", gbdt_config.shrink, "shrinkage (s)");
    gbdt->add_option("--seed", gbdt_config.seed, "seed (the fit itself is deterministic)");
    gbdt->add_option("--min-node", gbdt_config.min_node_instances, "minimum instances per leaf");
    gbdt->add_option("--model-out", gbdt_model, "model file to write")->required();
    gbdt->add_option("--monitor-data", gbdt_monitor_data, "held-out features scored per round");
    gbdt->add_option("--monitor-targets", gbdt_monitor_targets, "held-out targets");

    // bench
    BenchmarkSpec spec;
    std::string bench_csv;
    std::vector<std::string> bench_regs;
    bool no_gbdt = false;
    bool no_time = false;
    auto* bench = app.add_subcommand("bench", "synthetic benchmark: RGF vs GBDT with cross-validated parameters");
    bench->add_option("--q", spec.q_values, "leaves per target tree (repeatable)");
    bench->add_option("--runs", spec.runs, "runs per q");
    bench->add_option("--n-train", spec.n_train, "training instances");
    bench->add_option("--n-test", spec.n_test, "test instances");
    bench->add_option("--folds", spec.folds, "cross validation folds");
    bench->add_option("--seed", spec.seed, "master seed");
    bench->add_option("--max-leaf", spec.rgf_max_leaf, "RGF leaf budget");
    bench->add_option("--gbdt-max-trees", spec.gbdt_max_trees, "longest GBDT path considered");
    bench->add_option("--regs", bench_regs, "RGF regularizers (L2 MinPen MinPenSib)");
    bench->add_flag("--no-gbdt", no_gbdt, "skip the GBDT baseline");
    bench->add_flag("--no-time", no_time, "write 0 for train_seconds (byte-stable CSV)");
    bench->add_option("--csv", bench_csv, "CSV output path (default: stdout)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o;
        std::ostringstream d;
        const int code = app.exit(e, o, d);
        out << o.str();
        const auto diag = d.str();
        if (!diag.empty()) err << "rgf: " << detail::trim(diag.substr(0, diag.find('\n'))) << '\n';
        return code;
    }

    try {
        if (train->parsed())
            return cmd_train(train_data, train_flags, model_out, monitor_data, monitor_targets, out);
        if (predict->parsed()) return cmd_predict(predict_data, model_in, pred_out, out);
        if (eval->parsed()) return cmd_eval(eval_pred, eval_targets, eval_metric, out);
        if (cv->parsed()) return cmd_cv(cv_data, cv_flags, grid_path, folds, cv_seed, out);
        if (synth->parsed()) return cmd_synth(synth_config, synth_prefix, out);
        if (gbdt->parsed())
            return cmd_gbdt(gbdt_data, gbdt_config, gbdt_loss, gbdt_variant, gbdt_model, gbdt_monitor_data,
                            gbdt_monitor_targets, out);
        if (bench->parsed()) {
            if (!bench_regs.empty()) {
                spec.rgf_regs.clear();
                for (const auto& r : bench_regs) spec.rgf_regs.push_back(parse_reg(r));
            }
            spec.run_gbdt = !no_gbdt;
            spec.record_time = !no_time;
            return cmd_bench(spec, bench_csv, out);
        }
    } catch (const std::exception& e) {
        err << "rgf: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace rgf
