#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "daadb/boundary.hpp"
#include "daadb/dataset.hpp"
#include "daadb/metrics.hpp"
#include "daadb/model.hpp"
#include "daadb/representation.hpp"
#include "daadb/synthetic.hpp"

namespace daadb {

inline constexpr const char* kSyntheticDataset = "synthetic";

struct ExperimentConfig {
    std::string dataset = kSyntheticDataset;
    std::filesystem::path data_dir = "data";
    Method method = Method::da_adb;
    double known_ratio = 0.25;
    double labeled_ratio = 1.0;
    std::vector<std::uint64_t> seeds{0};
    EncoderSpec encoder;
    // EMB1 files: "{split}" is replaced by train/valid/test; a directory means <dir>/<split>.emb.
    std::string emb_file;
    std::size_t feature_dim = 0;  // 0: 768 for emb, 64 otherwise
    RepTrainConfig representation;
    BoundaryTrainConfig boundary;
    SyntheticSpec synthetic;
    double msp_threshold = OpenIntentModel::kDefaultMspThreshold;
    std::filesystem::path output_dir;  // empty: nothing written
    bool dump_radii = false;
    std::size_t jobs = 1;

    // Throws ContractError on invalid combinations.
    void validate() const;
    [[nodiscard]] std::size_t resolved_feature_dim() const;
    [[nodiscard]] EncoderKind resolved_encoder() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);
// FNV-1a of the canonical config JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);
// TOML with the same keys as the command-line flags (underscores instead of dashes).
ExperimentConfig load_config_toml(const std::filesystem::path& path);
ExperimentConfig parse_config_toml(std::string_view text);
// "0-9", "0,1,2" or "3".
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

// Corpus partitions, plus feature matrices when the dataset supplies its own features.
struct Corpus {
    std::vector<Utterance> train, valid, test;
    std::optional<Matrix> train_x, valid_x, test_x;
};

Corpus load_dataset(const ExperimentConfig& config);

struct SeedOutcome {
    std::uint64_t seed = 0;
    std::optional<MetricsReport> report;
    std::string error;
    std::optional<OpenIntentModel> model;
    std::optional<BoundaryFit> boundary_fit;
    // Test features and labels (Open = K), kept for re-evaluation.
    Matrix test_x;
    std::vector<std::size_t> test_labels;
    std::vector<std::string> test_texts;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<SeedOutcome> seeds;
    MetricsSummary aggregate;

    [[nodiscard]] std::vector<MetricsReport> reports() const;
};

// One seed: split, train, fit boundaries, evaluate. Errors are captured in the outcome.
SeedOutcome run_seed(const ExperimentConfig& config, const Corpus& corpus, std::uint64_t seed);

// All seeds; throws Error if every seed fails. Writes artifacts when config.output_dir is set.
ExperimentResult run_experiment(const ExperimentConfig& config);
ExperimentResult run_experiment(const ExperimentConfig& config, const Corpus& corpus);

nlohmann::json results_json(const ExperimentResult& result);

struct AblationRow {
    double factor = 1.0;
    double acc = 0;
    bool learned = false;  // factor 1.0
};

std::vector<AblationRow> run_radius_ablation(const ExperimentConfig& config, const std::vector<double>& factors);
std::vector<AblationRow> run_radius_ablation(const ExperimentConfig& config, const Corpus& corpus,
                                             const std::vector<double>& factors);
std::string ablation_csv(const std::vector<AblationRow>& rows);

struct LabeledRatioRow {
    double ratio = 1.0;
    Method method = Method::da_adb;
    double acc = 0;
};

std::vector<LabeledRatioRow> run_labeled_ratio_study(const ExperimentConfig& config, const std::vector<double>& ratios,
                                                     const std::vector<Method>& methods);
std::vector<LabeledRatioRow> run_labeled_ratio_study(const ExperimentConfig& config, const Corpus& corpus,
                                                     const std::vector<double>& ratios,
                                                     const std::vector<Method>& methods);
std::string labeled_ratio_csv(const std::vector<LabeledRatioRow>& rows);

// CSV "class,raw,radius".
std::string radii_csv(const BoundarySet& boundaries, const std::vector<std::string>& class_names);

// Aligned text table of ACC / F1 / F1-open / F1-known (percent) per dataset, method and known ratio,
// built from results.json documents.
std::string format_results_table(const std::vector<nlohmann::json>& results);

}  // namespace daadb
