#include "daadb/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <sstream>

#include "daadb/encoder.hpp"
#include "daadb/error.hpp"
#include "daadb/inference.hpp"

namespace daadb {

namespace fs = std::filesystem;

namespace {

std::optional<fs::path> find_partition(const fs::path& dir, std::initializer_list<const char*> stems) {
    for (const char* stem : stems) {
        for (const char* ext : {".tsv", ".jsonl", ".json"}) {
            auto p = dir / (std::string(stem) + ext);
            if (fs::exists(p)) return p;
        }
    }
    return std::nullopt;
}

fs::path embedding_path(const std::string& pattern, const std::string& split) {
    if (const auto pos = pattern.find("{split}"); pos != std::string::npos) {
        std::string p = pattern;
        p.replace(pos, 7, split);
        return p;
    }
    if (fs::is_directory(pattern)) return fs::path(pattern) / (split + ".emb");
    throw ContractError("--emb-file must contain '{split}' or name a directory");
}

Matrix load_partition_embeddings(const std::string& pattern, const std::string& split, std::size_t rows) {
    const auto path = embedding_path(pattern, split);
    Matrix m = load_embeddings(path);
    if (m.rows() != rows) {
        throw FormatError(path.string() + ": " + std::to_string(m.rows()) + " embedding rows for " +
                          std::to_string(rows) + " utterances");
    }
    return m;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed for " + path.string());
}

// Shortest text that reads back to the same double.
std::string format_number(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string seed_dir_name(std::uint64_t seed) { return "seed_" + std::to_string(seed); }

std::vector<std::string> class_names(const OpenIntentModel& model) {
    auto names = model.known_labels;
    names.push_back(model.open_label);
    return names;
}

void write_artifacts(const ExperimentResult& result) {
    const auto& dir = result.config.output_dir;
    fs::create_directories(dir);
    for (const auto& s : result.seeds) {
        if (!s.report) continue;
        const auto seed_dir = dir / seed_dir_name(s.seed);
        fs::create_directories(seed_dir);
        write_text(seed_dir / "metrics.json", to_json(*s.report, class_names(*s.model)).dump(2) + "\n");
        save_model(seed_dir / "model.daadb", *s.model);
        if (result.config.dump_radii && s.model->boundaries) {
            write_text(seed_dir / "radii.csv", radii_csv(*s.model->boundaries, s.model->known_labels));
        }
    }
    write_text(dir / "results.json", results_json(result).dump(2) + "\n");

    nlohmann::json manifest = {
        {"config_hash", config_hash(result.config)},
        {"config", to_json(result.config)},
        {"seeds", result.config.seeds},
        {"aggregate", to_json(result.aggregate)},
    };
    nlohmann::json failures = nlohmann::json::array();
    nlohmann::json artifacts = nlohmann::json::array();
    for (const auto& s : result.seeds) {
        if (!s.report) {
            failures.push_back({{"seed", s.seed}, {"error", s.error}});
            continue;
        }
        const auto d = seed_dir_name(s.seed);
        artifacts.push_back(d + "/metrics.json");
        artifacts.push_back(d + "/model.daadb");
        if (result.config.dump_radii && s.model->boundaries) artifacts.push_back(d + "/radii.csv");
    }
    artifacts.push_back("results.json");
    manifest["failures"] = failures;
    manifest["artifacts"] = artifacts;
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

ExperimentConfig without_output(ExperimentConfig config) {
    config.output_dir.clear();
    config.dump_radii = false;
    return config;
}

}  // namespace

Corpus load_dataset(const ExperimentConfig& config) {
    Corpus corpus;
    if (config.dataset == kSyntheticDataset) {
        auto syn = make_synthetic(config.synthetic);
        corpus.train = std::move(syn.train);
        corpus.valid = std::move(syn.valid);
        corpus.test = std::move(syn.test);
        corpus.train_x = std::move(syn.train_x);
        corpus.valid_x = std::move(syn.valid_x);
        corpus.test_x = std::move(syn.test_x);
        return corpus;
    }

    const auto dir = config.data_dir / config.dataset;
    const auto train = find_partition(dir, {"train"});
    const auto valid = find_partition(dir, {"dev", "valid"});
    const auto test = find_partition(dir, {"test"});
    if (!train || !valid || !test) {
        throw Error("dataset '" + config.dataset + "' needs train, dev (or valid) and test files under " +
                    dir.string());
    }
    corpus.train = load_corpus(*train);
    corpus.valid = load_corpus(*valid);
    corpus.test = load_corpus(*test);

    switch (config.resolved_encoder()) {
        case EncoderKind::bow:
            corpus.train_x = featurize(corpus.train, config.encoder.hash_dim, config.encoder.hash_seed);
            corpus.valid_x = featurize(corpus.valid, config.encoder.hash_dim, config.encoder.hash_seed);
            corpus.test_x = featurize(corpus.test, config.encoder.hash_dim, config.encoder.hash_seed);
            break;
        case EncoderKind::emb:
            corpus.train_x = load_partition_embeddings(config.emb_file, "train", corpus.train.size());
            corpus.valid_x = load_partition_embeddings(config.emb_file, "valid", corpus.valid.size());
            corpus.test_x = load_partition_embeddings(config.emb_file, "test", corpus.test.size());
            if (corpus.train_x->cols() != corpus.valid_x->cols() || corpus.train_x->cols() != corpus.test_x->cols()) {
                throw FormatError("embedding files disagree on the hidden size");
            }
            break;
        case EncoderKind::raw:
            throw ContractError("the raw encoder is only available for the synthetic dataset");
    }
    return corpus;
}

SeedOutcome run_seed(const ExperimentConfig& config, const Corpus& corpus, std::uint64_t seed) {
    SeedOutcome out;
    out.seed = seed;
    try {
        if (!corpus.train_x || !corpus.valid_x || !corpus.test_x) throw ContractError("corpus has no features");
        const auto space = select_known_classes(distinct_labels(corpus.train), config.known_ratio, seed);
        auto split = make_open_world_split(corpus.train, corpus.valid, corpus.test, space, config.labeled_ratio, seed);
        split.known_ratio = config.known_ratio;

        const Matrix x_train = corpus.train_x->select_rows(split.train_rows);
        const Matrix x_valid = corpus.valid_x->select_rows(split.valid_rows);
        const auto y_train = split.train_labels();
        const auto y_valid = split.valid_labels();

        RepTrainConfig rep = config.representation;
        rep.feature_dim = config.resolved_feature_dim();
        rep.seed = seed;
        rep.distance_aware = config.method == Method::da_adb;
        rep.head = config.method == Method::msp ? HeadKind::linear : HeadKind::cosine;
        auto trained = train_representation(x_train, y_train, x_valid, y_valid, space.num_known(), rep);

        OpenIntentModel model;
        model.method = config.method;
        model.encoder = config.encoder;
        model.encoder.kind = config.resolved_encoder();
        model.known_labels = space.known_labels();
        model.open_label = space.open_label();
        model.representation = std::move(trained.model);
        model.centroids = std::move(trained.centroids);
        model.msp_threshold = config.msp_threshold;

        if (config.method != Method::msp) {
            BoundaryTrainConfig bcfg = config.boundary;
            bcfg.seed = seed;
            auto fit = fit_boundaries(model.embed(x_train), y_train, model.centroids, bcfg);
            model.boundaries = fit.boundaries;
            out.boundary_fit = std::move(fit);
        }

        out.test_x = corpus.test_x->select_rows(split.test_rows);
        out.test_labels = split.test_labels();
        for (const auto& u : split.test) out.test_texts.push_back(u.text);
        out.report = evaluate(out.test_labels, model.predict(out.test_x), space.num_known());
        out.model = std::move(model);
    } catch (const std::exception& e) {
        out = SeedOutcome{};
        out.seed = seed;
        out.error = e.what();
    }
    return out;
}

std::vector<MetricsReport> ExperimentResult::reports() const {
    std::vector<MetricsReport> r;
    for (const auto& s : seeds) {
        if (s.report) r.push_back(*s.report);
    }
    return r;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    return run_experiment(config, load_dataset(config));
}

ExperimentResult run_experiment(const ExperimentConfig& config, const Corpus& corpus) {
    config.validate();
    ExperimentResult result;
    result.config = config;
    const auto& seeds = config.seeds;
    result.seeds.resize(seeds.size());
    if (config.jobs <= 1) {
        for (std::size_t i = 0; i < seeds.size(); ++i) result.seeds[i] = run_seed(config, corpus, seeds[i]);
    } else {
        for (std::size_t start = 0; start < seeds.size(); start += config.jobs) {
            const std::size_t end = std::min(seeds.size(), start + config.jobs);
            std::vector<std::future<SeedOutcome>> jobs;
            for (std::size_t i = start; i < end; ++i) {
                jobs.push_back(std::async(std::launch::async, [&, i] { return run_seed(config, corpus, seeds[i]); }));
            }
            for (std::size_t i = start; i < end; ++i) result.seeds[i] = jobs[i - start].get();
        }
    }

    const auto reports = result.reports();
    if (reports.empty()) {
        std::string msg = "all seeds failed";
        if (!result.seeds.empty()) msg += ": " + result.seeds.front().error;
        throw Error(msg);
    }
    result.aggregate = aggregate_runs(reports);
    if (!config.output_dir.empty()) write_artifacts(result);
    return result;
}

nlohmann::json results_json(const ExperimentResult& result) {
    const auto& c = result.config;
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& s : result.seeds) {
        nlohmann::json run = {{"seed", s.seed}};
        if (s.report) {
            run["metrics"] = to_json(*s.report, class_names(*s.model));
            if (s.boundary_fit) {
                run["boundary_epochs"] = s.boundary_fit->epochs;
                run["boundary_converged"] = s.boundary_fit->converged;
            }
        } else {
            run["error"] = s.error;
        }
        runs.push_back(std::move(run));
    }
    return {
        {"dataset", c.dataset},
        {"method", to_string(c.method)},
        {"known_ratio", c.known_ratio},
        {"labeled_ratio", c.labeled_ratio},
        {"config_hash", config_hash(c)},
        {"runs", runs},
        {"aggregate", to_json(result.aggregate)},
    };
}

std::vector<AblationRow> run_radius_ablation(const ExperimentConfig& config, const std::vector<double>& factors) {
    config.validate();
    return run_radius_ablation(config, load_dataset(config), factors);
}

std::vector<AblationRow> run_radius_ablation(const ExperimentConfig& config, const Corpus& corpus,
                                             const std::vector<double>& factors) {
    if (config.method == Method::msp) throw ContractError("radius ablation needs a boundary method, not msp");
    const auto base = run_experiment(without_output(config), corpus);
    std::vector<AblationRow> rows;
    for (double f : factors) {
        double acc = 0;
        std::size_t n = 0;
        for (const auto& s : base.seeds) {
            if (!s.report) continue;
            const auto pred = s.model->predict_with(s.test_x, scale_radii(*s.model->boundaries, f));
            acc += evaluate(s.test_labels, pred, s.model->num_known()).acc;
            ++n;
        }
        rows.push_back({f, acc / static_cast<double>(n), f == 1.0});
    }
    return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
    std::string out = "factor,acc,learned\n";
    for (const auto& r : rows) {
        out += format_number(r.factor) + "," + format_number(r.acc) + "," + (r.learned ? "1" : "0") + "\n";
    }
    return out;
}

std::vector<LabeledRatioRow> run_labeled_ratio_study(const ExperimentConfig& config, const std::vector<double>& ratios,
                                                     const std::vector<Method>& methods) {
    config.validate();
    return run_labeled_ratio_study(config, load_dataset(config), ratios, methods);
}

std::vector<LabeledRatioRow> run_labeled_ratio_study(const ExperimentConfig& config, const Corpus& corpus,
                                                     const std::vector<double>& ratios,
                                                     const std::vector<Method>& methods) {
    std::vector<LabeledRatioRow> rows;
    for (double ratio : ratios) {
        if (!(ratio > 0.0 && ratio <= 1.0)) throw ContractError("labeled ratios must lie in (0, 1]");
        for (Method m : methods) {
            auto c = without_output(config);
            c.labeled_ratio = ratio;
            c.method = m;
            rows.push_back({ratio, m, run_experiment(c, corpus).aggregate.acc_mean});
        }
    }
    return rows;
}

std::string labeled_ratio_csv(const std::vector<LabeledRatioRow>& rows) {
    std::string out = "ratio,method,acc\n";
    for (const auto& r : rows) {
        out += format_number(r.ratio) + "," + std::string(to_string(r.method)) + "," + format_number(r.acc) + "\n";
    }
    return out;
}

std::string radii_csv(const BoundarySet& boundaries, const std::vector<std::string>& names) {
    if (names.size() != boundaries.num_classes()) throw ContractError("one class name per boundary expected");
    std::string out = "class,raw,radius\n";
    for (std::size_t k = 0; k < names.size(); ++k) {
        out += names[k] + "," + format_number(boundaries.raw[k]) + "," + format_number(boundaries.radius[k]) + "\n";
    }
    return out;
}

std::string format_results_table(const std::vector<nlohmann::json>& results) {
    struct Row {
        std::string dataset, method;
        double known = 0;
        MetricsSummary s;
    };
    std::vector<Row> rows;
    for (const auto& r : results) {
        rows.push_back({r.at("dataset").get<std::string>(), r.at("method").get<std::string>(),
                        r.at("known_ratio").get<double>(), summary_from_json(r.at("aggregate"))});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.dataset != b.dataset) return a.dataset < b.dataset;
        return a.known < b.known;
    });

    std::vector<std::vector<std::string>> cells{{"dataset", "known", "method", "ACC", "F1", "F1-open", "F1-known", "runs"}};
    auto pct = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
        return std::string(buf);
    };
    for (const auto& r : rows) {
        char known[32];
        std::snprintf(known, sizeof known, "%g%%", 100.0 * r.known);
        cells.push_back({r.dataset, known, r.method, pct(r.s.acc_mean), pct(r.s.f1_all_mean), pct(r.s.f1_open_mean),
                         pct(r.s.f1_known_mean), std::to_string(r.s.runs)});
    }
    std::vector<std::size_t> width(cells.front().size(), 0);
    for (const auto& row : cells) {
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
    }
    std::ostringstream os;
    for (const auto& row : cells) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            // Text columns left-aligned, numbers right-aligned.
            if (i < 3) os << std::left; else os << std::right;
            os << std::setw(static_cast<int>(width[i])) << row[i];
            os << (i + 1 < row.size() ? "  " : "\n");
        }
    }
    return os.str();
}

}  // namespace daadb
