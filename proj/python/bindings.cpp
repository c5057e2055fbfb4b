#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>

#include "rgf/boosting.hpp"
#include "rgf/dataset.hpp"
#include "rgf/error.hpp"
#include "rgf/forest.hpp"
#include "rgf/synth.hpp"
#include "rgf/trainer.hpp"

namespace py = pybind11;
using namespace rgf;

namespace {

using Matrix = py::array_t<double, py::array::c_style | py::array::forcecast>;

Dataset to_dataset(const Matrix& x, std::optional<Matrix> y) {
    if (x.ndim() != 2) throw py::value_error("features must be a 2-D array");
    const auto n = static_cast<std::size_t>(x.shape(0));
    const auto d = static_cast<std::size_t>(x.shape(1));
    std::vector<double> features(x.data(), x.data() + n * d);
    std::vector<double> targets;
    if (y) {
        if (y->ndim() != 1) throw py::value_error("targets must be a 1-D array");
        targets.assign(y->data(), y->data() + y->shape(0));
    }
    Dataset data(n, d, std::move(features));
    if (y) data.set_targets(std::move(targets));
    return data;
}

py::array_t<double> to_array(std::span<const double> values) {
    py::array_t<double> out(static_cast<py::ssize_t>(values.size()));
    std::copy(values.begin(), values.end(), out.mutable_data());
    return out;
}

TrainerConfig trainer_config(const std::map<std::string, py::object>& settings) {
    TrainerConfig config;
    for (const auto& [key, value] : settings) {
        if (key == "metric") config.metric = parse_metric(py::str(value).cast<std::string>());
        else apply_setting(config, key, py::str(value).cast<std::string>());
    }
    return config;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Regularized greedy forest core";

    py::register_exception<Error>(m, "RgfError", PyExc_RuntimeError);

    py::class_<Forest>(m, "Forest")
        .def(py::init<>())
        .def_property_readonly("tree_count", &Forest::tree_count)
        .def_property_readonly("leaf_count", &Forest::leaf_count)
        .def("predict",
             [](const Forest& f, const Matrix& x) { return to_array(predict_all(f, to_dataset(x, std::nullopt))); },
             py::arg("x"))
        .def("to_text", [](const Forest& f) { return serialize(f); })
        .def_static("from_text", [](const std::string& text) { return deserialize(text); })
        .def("save", [](const Forest& f, const std::string& path) { save_model(f, path); })
        .def_static("load", &load_model)
        .def("__eq__", [](const Forest& a, const Forest& b) { return a == b; });

    m.def(
        "train",
        [](const Matrix& x, const Matrix& y, const std::map<std::string, py::object>& settings) {
            const Dataset data = to_dataset(x, y);
            auto result = train_rgf(data, trainer_config(settings));
            return py::make_tuple(result.forest, result.report.stop_reason, result.report.operations);
        },
        py::arg("x"), py::arg("y"), py::arg("settings") = std::map<std::string, py::object>{},
        "Fit a regularized greedy forest. Settings use the command-line names, e.g. "
        "{'lambda': 0.1, 'reg': 'MinPenSib', 'max-leaf': 500}. Returns (forest, stop_reason, operations).");

    m.def(
        "boost",
        [](const Matrix& x, const Matrix& y, const std::string& loss, std::size_t tree_leaves, std::size_t num_trees,
           double shrink, const std::string& variant) {
            GBDTConfig config;
            config.loss = parse_loss(loss);
            config.tree_leaves = tree_leaves;
            config.num_trees = num_trees;
            config.shrink = shrink;
            config.variant = parse_variant(variant);
            const Dataset data = to_dataset(x, y);
            auto result = boost(data, config);
            std::vector<double> losses;
            for (const auto& r : result.rounds) losses.push_back(r.train_loss);
            return py::make_tuple(result.forest, to_array(losses));
        },
        py::arg("x"), py::arg("y"), py::arg("loss") = "LS", py::arg("tree_leaves") = 5, py::arg("num_trees") = 100,
        py::arg("shrink") = 0.1, py::arg("variant") = "gbdt",
        "Gradient boosting baseline. Returns (forest, training loss per round).");

    m.def(
        "evaluate",
        [](const Matrix& predictions, const Matrix& targets, const std::string& metric) {
            return evaluate(std::span<const double>(predictions.data(), predictions.size()),
                            std::span<const double>(targets.data(), targets.size()), parse_metric(metric));
        },
        py::arg("predictions"), py::arg("targets"), py::arg("metric") = "rmse");

    m.def(
        "cross_validate",
        [](const Matrix& x, const Matrix& y, const std::vector<std::map<std::string, py::object>>& grid,
           std::size_t folds, std::uint64_t seed, const std::string& metric) {
            const Dataset data = to_dataset(x, y);
            std::vector<TrainerConfig> configs;
            for (const auto& g : grid) configs.push_back(trainer_config(g));
            const auto result = cross_validate(data, configs, folds, seed, parse_metric(metric));
            return py::make_tuple(result.best, result.scores);
        },
        py::arg("x"), py::arg("y"), py::arg("grid"), py::arg("folds") = 2, py::arg("seed") = 1,
        py::arg("metric") = "rmse", "Returns (best index, mean held-out score per grid entry).");

    m.def(
        "synthesize",
        [](std::size_t q, std::size_t n_train, std::size_t n_test, std::uint64_t seed, std::size_t dim,
           std::size_t target_trees) {
            SynthConfig config;
            config.q = q;
            config.n_train = n_train;
            config.n_test = n_test;
            config.seed = seed;
            config.dim = dim;
            config.num_target_trees = target_trees;
            const auto data = synthesize(config);
            auto matrix = [](const Dataset& d) {
                py::array_t<double> out({static_cast<py::ssize_t>(d.size()), static_cast<py::ssize_t>(d.dim())});
                std::copy(d.features().begin(), d.features().end(), out.mutable_data());
                return out;
            };
            return py::make_tuple(matrix(data.train), to_array(data.train.targets()), matrix(data.test),
                                  to_array(data.test.targets()), data.target);
        },
        py::arg("q"), py::arg("n_train") = 2000, py::arg("n_test") = 20000, py::arg("seed") = 1, py::arg("dim") = 10,
        py::arg("target_trees") = 100, "Returns (x_train, y_train, x_test, y_test, target_forest).");
}
