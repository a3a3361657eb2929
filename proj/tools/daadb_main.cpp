#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "daadb/encoder.hpp"
#include "daadb/error.hpp"
#include "daadb/harness.hpp"
#include "daadb/model.hpp"

namespace fs = std::filesystem;
using namespace daadb;

namespace {

// Flags that override the TOML config; unset flags leave the config value alone.
struct Overrides {
    std::string config_file;
    std::optional<std::string> data_dir, dataset, method, encoder, emb_file, seeds, output;
    std::optional<double> known_ratio, labeled_ratio, alpha, rep_lr, boundary_lr, boundary_tol;
    std::optional<std::size_t> feature_dim, hash_dim, batch_size, max_epochs, patience, boundary_max_epochs,
        boundary_batch_size, jobs;
    std::optional<std::uint64_t> hash_seed;
    bool dump_radii = false;
};

void add_experiment_flags(CLI::App* app, Overrides& o) {
    app->add_option("--config", o.config_file, "TOML config file")->check(CLI::ExistingFile);
    app->add_option("--data-dir", o.data_dir, "Directory holding <dataset>/{train,dev,test}.{tsv,jsonl}");
    app->add_option("--dataset", o.dataset, "Dataset name, or 'synthetic'");
    app->add_option("--known-ratio", o.known_ratio, "Fraction of labels treated as known");
    app->add_option("--labeled-ratio", o.labeled_ratio, "Fraction of labeled training rows kept per class");
    app->add_option("--seed", o.seeds, "Seeds: '0-9', '0,1,2' or a single value");
    app->add_option("--method", o.method, "da_adb, adb or msp");
    app->add_option("--encoder", o.encoder, "bow or emb");
    app->add_option("--emb-file", o.emb_file, "EMB1 files: a path with '{split}' or a directory of <split>.emb");
    app->add_option("--feature-dim", o.feature_dim, "Intent representation size (0: automatic)");
    app->add_option("--hash-dim", o.hash_dim, "Hashed bag-of-words input size");
    app->add_option("--hash-seed", o.hash_seed, "Hashed bag-of-words seed");
    app->add_option("--alpha", o.alpha, "Logit scale");
    app->add_option("--rep-lr", o.rep_lr, "Representation learning rate");
    app->add_option("--batch-size", o.batch_size, "Representation batch size");
    app->add_option("--max-epochs", o.max_epochs, "Representation epoch budget");
    app->add_option("--patience", o.patience, "Epochs without validation improvement before stopping");
    app->add_option("--boundary-lr", o.boundary_lr, "Boundary Adam learning rate");
    app->add_option("--boundary-max-epochs", o.boundary_max_epochs, "Boundary epoch budget");
    app->add_option("--boundary-tol", o.boundary_tol, "Mean radius change that counts as converged");
    app->add_option("--boundary-batch-size", o.boundary_batch_size, "Boundary batch size (0: full batch)");
    app->add_flag("--dump-radii", o.dump_radii, "Write radii.csv per seed");
    app->add_option("--output", o.output, "Output directory");
    app->add_option("--jobs", o.jobs, "Seeds run in parallel");
}

ExperimentConfig resolve(const Overrides& o) {
    ExperimentConfig c = o.config_file.empty() ? ExperimentConfig{} : load_config_toml(o.config_file);
    if (o.data_dir) c.data_dir = *o.data_dir;
    if (o.dataset) c.dataset = *o.dataset;
    if (o.known_ratio) c.known_ratio = *o.known_ratio;
    if (o.labeled_ratio) c.labeled_ratio = *o.labeled_ratio;
    if (o.seeds) c.seeds = parse_seed_list(*o.seeds);
    if (o.method) c.method = parse_method(*o.method);
    if (o.encoder) c.encoder.kind = parse_encoder(*o.encoder);
    if (o.emb_file) c.emb_file = *o.emb_file;
    if (o.feature_dim) c.feature_dim = *o.feature_dim;
    if (o.hash_dim) c.encoder.hash_dim = *o.hash_dim;
    if (o.hash_seed) c.encoder.hash_seed = *o.hash_seed;
    if (o.alpha) c.representation.alpha = *o.alpha;
    if (o.rep_lr) c.representation.learning_rate = *o.rep_lr;
    if (o.batch_size) c.representation.batch_size = *o.batch_size;
    if (o.max_epochs) c.representation.max_epochs = *o.max_epochs;
    if (o.patience) c.representation.patience = *o.patience;
    if (o.boundary_lr) c.boundary.learning_rate = *o.boundary_lr;
    if (o.boundary_max_epochs) c.boundary.max_epochs = *o.boundary_max_epochs;
    if (o.boundary_tol) c.boundary.tolerance = *o.boundary_tol;
    if (o.boundary_batch_size) c.boundary.batch_size = *o.boundary_batch_size;
    if (o.dump_radii) c.dump_radii = true;
    if (o.output) c.output_dir = *o.output;
    if (o.jobs) c.jobs = *o.jobs;
    c.validate();
    return c;
}

std::vector<double> parse_doubles(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ',');) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(part, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != part.size()) throw ContractError("not a number: '" + part + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ContractError("empty number list");
    return out;
}

void emit(const std::optional<std::string>& path, const std::string& text) {
    if (!path) {
        std::cout << text;
        return;
    }
    std::ofstream out(*path, std::ios::binary);
    if (!(out << text)) throw Error("cannot write " + *path);
}

void print_summary(const ExperimentResult& r) {
    for (const auto& s : r.seeds) {
        if (s.report) {
            std::printf("seed %llu  acc %.4f  f1 %.4f  f1_open %.4f  f1_known %.4f\n",
                        static_cast<unsigned long long>(s.seed), s.report->acc, s.report->f1_all, s.report->f1_open,
                        s.report->f1_known);
        } else {
            std::printf("seed %llu  FAILED: %s\n", static_cast<unsigned long long>(s.seed), s.error.c_str());
        }
    }
    std::cout << format_results_table({results_json(r)});
}

int cmd_predict(const std::string& model_path, const std::string& input, const std::optional<std::string>& texts,
                const std::optional<std::string>& out) {
    const auto model = load_model(model_path);
    std::vector<std::string> names;
    Matrix x;
    const bool emb_input = fs::path(input).extension() == ".emb";
    if (emb_input) {
        if (model.encoder.kind != EncoderKind::emb) throw ContractError("model was not trained on EMB1 features");
        x = load_embeddings(input);
        if (texts) {
            for (auto& u : load_corpus(*texts)) names.push_back(std::move(u.text));
            if (names.size() != x.rows()) throw FormatError("text file and embedding file differ in row count");
        } else {
            for (std::size_t i = 0; i < x.rows(); ++i) names.push_back(std::to_string(i));
        }
    } else {
        if (model.encoder.kind != EncoderKind::bow) {
            throw ContractError("model needs " + std::string(to_string(model.encoder.kind)) + " features, not text");
        }
        const auto rows = load_corpus(input);
        x = featurize(rows, model.encoder.hash_dim, model.encoder.hash_seed);
        for (const auto& u : rows) names.push_back(u.text);
    }
    const auto pred = model.predict(x);
    std::string text = "text\tpredicted_label\n";
    for (std::size_t i = 0; i < pred.size(); ++i) text += names[i] + "\t" + model.label_name(pred[i]) + "\n";
    emit(out, text);
    return 0;
}

int cmd_export_table(const std::vector<std::string>& inputs, const std::optional<std::string>& out) {
    std::vector<nlohmann::json> docs;
    for (const auto& in : inputs) {
        fs::path p = in;
        if (fs::is_directory(p)) p /= "results.json";
        std::ifstream f(p);
        if (!f) throw Error("cannot open " + p.string());
        try {
            docs.push_back(nlohmann::json::parse(f));
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(p.string() + ": " + e.what());
        }
    }
    emit(out, format_results_table(docs));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Open intent detection with distance-aware adaptive decision boundaries"};
    app.require_subcommand(1);

    Overrides run_o, abl_o, study_o;
    auto* run = app.add_subcommand("run", "Train and evaluate every seed, writing artifacts to --output");
    add_experiment_flags(run, run_o);

    auto* ablate = app.add_subcommand("ablate-radius", "Re-evaluate learned boundaries with scaled radii");
    add_experiment_flags(ablate, abl_o);
    std::string factors = "0.25,0.5,0.75,1,1.25,1.5,2,4";
    std::optional<std::string> ablate_csv;
    ablate->add_option("--factors", factors, "Comma-separated radius scale factors")->capture_default_str();
    ablate->add_option("--csv", ablate_csv, "CSV destination (default stdout)");

    auto* study = app.add_subcommand("study-labeled-ratio", "Accuracy across labeled ratios and methods");
    add_experiment_flags(study, study_o);
    std::string ratios = "0.2,0.4,0.6,0.8,1";
    std::string methods = "da_adb,adb";
    std::optional<std::string> study_csv;
    study->add_option("--ratios", ratios, "Comma-separated labeled ratios")->capture_default_str();
    study->add_option("--methods", methods, "Comma-separated methods")->capture_default_str();
    study->add_option("--csv", study_csv, "CSV destination (default stdout)");

    auto* predict = app.add_subcommand("predict", "Label utterances with a saved model");
    std::string model_path, input;
    std::optional<std::string> texts, predict_out;
    predict->add_option("--model", model_path, "DAADB1 model file")->required()->check(CLI::ExistingFile);
    predict->add_option("--input", input, "TSV/JSONL corpus, or an EMB1 file (.emb)")->required()->check(CLI::ExistingFile);
    predict->add_option("--texts", texts, "Corpus supplying the text column for EMB1 input");
    predict->add_option("--out", predict_out, "TSV destination (default stdout)");

    auto* table = app.add_subcommand("export-table", "Aligned table from results.json files or run directories");
    std::vector<std::string> table_inputs;
    std::optional<std::string> table_out;
    table->add_option("inputs", table_inputs, "results.json files or output directories")->required();
    table->add_option("--out", table_out, "Destination (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            print_summary(run_experiment(resolve(run_o)));
        } else if (*ablate) {
            const auto rows = run_radius_ablation(resolve(abl_o), parse_doubles(factors));
            emit(ablate_csv, ablation_csv(rows));
        } else if (*study) {
            std::vector<Method> ms;
            std::stringstream ss(methods);
            for (std::string m; std::getline(ss, m, ',');) ms.push_back(parse_method(m));
            const auto rows = run_labeled_ratio_study(resolve(study_o), parse_doubles(ratios), ms);
            emit(study_csv, labeled_ratio_csv(rows));
        } else if (*predict) {
            return cmd_predict(model_path, input, texts, predict_out);
        } else if (*table) {
            return cmd_export_table(table_inputs, table_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "daadb: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
