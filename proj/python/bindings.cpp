#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "daadb/boundary.hpp"
#include "daadb/encoder.hpp"
#include "daadb/error.hpp"
#include "daadb/harness.hpp"
#include "daadb/inference.hpp"
#include "daadb/metrics.hpp"
#include "daadb/model.hpp"

namespace py = pybind11;
using namespace daadb;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IndexArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const DoubleArray& a) {
    if (a.ndim() != 2) throw py::value_error("expected a 2-D array");
    const auto rows = static_cast<std::size_t>(a.shape(0));
    const auto cols = static_cast<std::size_t>(a.shape(1));
    return Matrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

py::array_t<double> to_array(const Matrix& m) {
    py::array_t<double> out({m.rows(), m.cols()});
    std::copy(m.data().begin(), m.data().end(), out.mutable_data());
    return out;
}

std::vector<std::size_t> to_indices(const IndexArray& a) {
    if (a.ndim() != 1) throw py::value_error("expected a 1-D integer array");
    std::vector<std::size_t> out(static_cast<std::size_t>(a.shape(0)));
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (a.data()[i] < 0) throw py::value_error("class indices must be non-negative");
        out[i] = static_cast<std::size_t>(a.data()[i]);
    }
    return out;
}

py::array_t<std::int64_t> to_index_array(const std::vector<std::size_t>& v) {
    py::array_t<std::int64_t> out(static_cast<py::ssize_t>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out.mutable_data()[i] = static_cast<std::int64_t>(v[i]);
    return out;
}

std::vector<double> to_vector(const DoubleArray& a) {
    if (a.ndim() != 1) throw py::value_error("expected a 1-D array");
    return {a.data(), a.data() + a.shape(0)};
}

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_python(const py::object& o) {
    return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

ExperimentConfig config_from(const py::object& o) {
    if (py::isinstance<py::dict>(o)) return config_from_json(from_python(o));
    return load_config_toml(o.cast<std::filesystem::path>());
}

Centroids centroids_from(const DoubleArray& a) {
    Matrix m = to_matrix(a);
    return {std::move(m), std::vector<std::size_t>(static_cast<std::size_t>(a.shape(0)), 0)};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Open intent detection with distance-aware adaptive decision boundaries";

    // Translators are tried newest first, so the base class goes in before its subclasses.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);
    py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);

    m.attr("OPEN_LABEL") = kOpenLabel;

    m.def("tokenize", &tokenize, py::arg("text"));
    m.def(
        "featurize",
        [](const std::vector<std::string>& texts, std::size_t hash_dim, std::uint64_t hash_seed) {
            std::vector<Utterance> rows;
            for (const auto& t : texts) rows.push_back({t, ""});
            return to_array(featurize(rows, hash_dim, hash_seed));
        },
        py::arg("texts"), py::arg("hash_dim") = 2048, py::arg("hash_seed") = 0,
        "Signed hashed bag of words, one L2-normalised row per text.");
    m.def("load_embeddings", [](const std::filesystem::path& p) { return to_array(load_embeddings(p)); },
          py::arg("path"));
    m.def("save_embeddings",
          [](const std::filesystem::path& p, const DoubleArray& a) { save_embeddings(p, to_matrix(a)); },
          py::arg("path"), py::arg("matrix"));
    m.def("load_corpus", [](const std::filesystem::path& p) {
        std::vector<std::pair<std::string, std::string>> out;
        for (auto& u : load_corpus(p)) out.emplace_back(std::move(u.text), std::move(u.label));
        return out;
    }, py::arg("path"), "List of (text, label) pairs from a TSV or JSONL corpus.");

    m.def("softplus", &softplus, py::arg("x"));
    m.def("sigmoid", &sigmoid, py::arg("x"));
    m.def("distance_coefficient", &distance_coefficient, py::arg("nearest_distance"), py::arg("runner_up_distance"));
    m.def("squash", [](const DoubleArray& v) { return squash(to_vector(v)); }, py::arg("v"));
    m.def(
        "compute_centroids",
        [](const DoubleArray& z, const IndexArray& labels, std::size_t num_classes) {
            return to_array(compute_centroids(to_matrix(z), to_indices(labels), num_classes).matrix);
        },
        py::arg("z"), py::arg("labels"), py::arg("num_classes"));

    m.def(
        "boundary_gradient",
        [](const DoubleArray& distances, const IndexArray& labels, const DoubleArray& raw, std::size_t k) {
            return boundary_gradient(to_vector(distances), to_indices(labels), BoundarySet::from_raw(to_vector(raw)), k);
        },
        py::arg("distances"), py::arg("labels"), py::arg("raw"), py::arg("k"),
        "Derivative of the class-k boundary loss with respect to its raw parameter.");
    m.def(
        "fit_boundaries",
        [](const DoubleArray& z, const IndexArray& labels, std::size_t num_classes, double learning_rate,
           std::size_t max_epochs, double tolerance, std::size_t batch_size, std::uint64_t seed) {
            const Matrix zm = to_matrix(z);
            const auto y = to_indices(labels);
            BoundaryTrainConfig cfg;
            cfg.learning_rate = learning_rate;
            cfg.max_epochs = max_epochs;
            cfg.tolerance = tolerance;
            cfg.batch_size = batch_size;
            cfg.seed = seed;
            const auto c = compute_centroids(zm, y, num_classes);
            const auto fit = fit_boundaries(zm, y, c, cfg);
            py::dict out;
            out["centroids"] = to_array(c.matrix);
            out["raw"] = fit.boundaries.raw;
            out["radius"] = fit.boundaries.radius;
            out["epochs"] = fit.epochs;
            out["converged"] = fit.converged;
            return out;
        },
        py::arg("z"), py::arg("labels"), py::arg("num_classes"), py::arg("learning_rate") = 0.05,
        py::arg("max_epochs") = 200, py::arg("tolerance") = 1e-4, py::arg("batch_size") = 0, py::arg("seed") = 0);
    m.def(
        "classify",
        [](const DoubleArray& z, const DoubleArray& centroids, const DoubleArray& radius) {
            const auto c = centroids_from(centroids);
            const auto b = BoundarySet::from_radius(to_vector(radius), c);
            return to_index_array(class_indices(classify(to_matrix(z), c, b)));
        },
        py::arg("z"), py::arg("centroids"), py::arg("radius"),
        "Class index per row; K (the number of centroids) means open.");
    m.def(
        "classify_msp",
        [](const DoubleArray& probabilities, double threshold) {
            return to_index_array(classify_msp(to_matrix(probabilities), threshold));
        },
        py::arg("probabilities"), py::arg("threshold") = kMspThreshold);

    m.def(
        "evaluate",
        [](const IndexArray& y_true, const IndexArray& y_pred, std::size_t num_known) {
            return to_python(to_json(evaluate(to_indices(y_true), to_indices(y_pred), num_known)));
        },
        py::arg("y_true"), py::arg("y_pred"), py::arg("num_known"));

    m.def("config_hash", [](const py::object& cfg) { return config_hash(config_from(cfg)); }, py::arg("config"));
    m.def("resolve_config", [](const py::object& cfg) { return to_python(to_json(config_from(cfg))); },
          py::arg("config"), "Full config with defaults filled in, from a dict or a TOML path.");
    m.def(
        "run_experiment",
        [](const py::object& cfg) {
            const auto c = config_from(cfg);
            nlohmann::json j;
            {
                py::gil_scoped_release release;
                j = results_json(run_experiment(c));
            }
            return to_python(j);
        },
        py::arg("config"), "Runs every seed; writes artifacts when output_dir is set. Returns the results document.");
    m.def(
        "run_radius_ablation",
        [](const py::object& cfg, const std::vector<double>& factors) {
            const auto c = config_from(cfg);
            std::vector<AblationRow> rows;
            {
                py::gil_scoped_release release;
                rows = run_radius_ablation(c, factors);
            }
            std::vector<std::pair<double, double>> out;
            for (const auto& r : rows) out.emplace_back(r.factor, r.acc);
            return out;
        },
        py::arg("config"), py::arg("factors"));
    m.def(
        "run_labeled_ratio_study",
        [](const py::object& cfg, const std::vector<double>& ratios, const std::vector<std::string>& methods) {
            const auto c = config_from(cfg);
            std::vector<Method> ms;
            for (const auto& s : methods) ms.push_back(parse_method(s));
            std::vector<LabeledRatioRow> rows;
            {
                py::gil_scoped_release release;
                rows = run_labeled_ratio_study(c, ratios, ms);
            }
            std::vector<std::tuple<double, std::string, double>> out;
            for (const auto& r : rows) out.emplace_back(r.ratio, std::string(to_string(r.method)), r.acc);
            return out;
        },
        py::arg("config"), py::arg("ratios"), py::arg("methods") = std::vector<std::string>{"da_adb", "adb"});
    m.def(
        "format_results_table",
        [](const py::list& docs) {
            std::vector<nlohmann::json> js;
            for (const auto& d : docs) js.push_back(from_python(py::reinterpret_borrow<py::object>(d)));
            return format_results_table(js);
        },
        py::arg("results"));

    py::class_<OpenIntentModel>(m, "Model")
        .def_static("load", [](const std::filesystem::path& p) { return load_model(p); }, py::arg("path"))
        .def("save", [](const OpenIntentModel& self, const std::filesystem::path& p) { save_model(p, self); },
             py::arg("path"))
        .def_property_readonly("method", [](const OpenIntentModel& self) { return std::string(to_string(self.method)); })
        .def_property_readonly("encoder", [](const OpenIntentModel& self) { return std::string(to_string(self.encoder.kind)); })
        .def_property_readonly("known_labels", [](const OpenIntentModel& self) { return self.known_labels; })
        .def_property_readonly("open_label", [](const OpenIntentModel& self) { return self.open_label; })
        .def_property_readonly("num_known", &OpenIntentModel::num_known)
        .def_property_readonly("input_dim", [](const OpenIntentModel& self) { return self.representation.encoder.input_dim(); })
        .def_property_readonly("centroids", [](const OpenIntentModel& self) { return to_array(self.centroids.matrix); })
        .def_property_readonly("radius", [](const OpenIntentModel& self) -> py::object {
            if (!self.boundaries) return py::none();
            return py::cast(self.boundaries->radius);
        })
        .def("embed", [](const OpenIntentModel& self, const DoubleArray& x) { return to_array(self.embed(to_matrix(x))); },
             py::arg("x"))
        .def("predict", [](const OpenIntentModel& self, const DoubleArray& x) { return to_index_array(self.predict(to_matrix(x))); },
             py::arg("x"), "Class index per row of input features; num_known means open.")
        .def("predict_scaled",
             [](const OpenIntentModel& self, const DoubleArray& x, double factor) {
                 if (!self.boundaries) throw ContractError("model has no decision boundaries");
                 return to_index_array(self.predict_with(to_matrix(x), scale_radii(*self.boundaries, factor)));
             },
             py::arg("x"), py::arg("factor"))
        .def("predict_texts",
             [](const OpenIntentModel& self, const std::vector<std::string>& texts) {
                 if (self.encoder.kind != EncoderKind::bow) throw ContractError("model was not trained on text features");
                 std::vector<Utterance> rows;
                 for (const auto& t : texts) rows.push_back({t, ""});
                 std::vector<std::string> out;
                 for (std::size_t k : self.predict(featurize(rows, self.encoder.hash_dim, self.encoder.hash_seed))) {
                     out.push_back(self.label_name(k));
                 }
                 return out;
             },
             py::arg("texts"), "Label names (or the open label) for raw texts.")
        .def("label_name", &OpenIntentModel::label_name, py::arg("index"));
}
