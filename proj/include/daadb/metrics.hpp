#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace daadb {

struct ClassScores {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    std::size_t support = 0;

    friend bool operator==(const ClassScores&, const ClassScores&) = default;
};

// Class indices 0..K-1 are known, K is Open. Undefined precision or recall counts as 0.
struct MetricsReport {
    double acc = 0;
    double f1_all = 0;      // harmonic mean of macro-P and macro-R over K+1 classes
    double f1_known = 0;    // same over the K known classes
    double f1_open = 0;
    double macro_f1_mean = 0;  // mean of per-class F1 over K+1 classes (diagnostic)
    std::vector<ClassScores> per_class;
    std::vector<std::vector<std::size_t>> confusion;  // [true][pred]

    [[nodiscard]] std::size_t num_known() const noexcept { return per_class.empty() ? 0 : per_class.size() - 1; }

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

MetricsReport evaluate(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred, std::size_t num_known);

double harmonic_mean(double a, double b);

struct MetricsSummary {
    std::size_t runs = 0;
    double acc_mean = 0, acc_std = 0;
    double f1_all_mean = 0, f1_all_std = 0;
    double f1_known_mean = 0, f1_known_std = 0;
    double f1_open_mean = 0, f1_open_std = 0;
    double macro_f1_mean_mean = 0, macro_f1_mean_std = 0;

    friend bool operator==(const MetricsSummary&, const MetricsSummary&) = default;
};

// Elementwise mean and sample (n - 1) standard deviation; std is 0 for one run.
MetricsSummary aggregate_runs(std::span<const MetricsReport> reports);

nlohmann::json to_json(const MetricsReport& report, const std::vector<std::string>& class_names = {});
nlohmann::json to_json(const MetricsSummary& summary);
MetricsSummary summary_from_json(const nlohmann::json& j);

}  // namespace daadb
