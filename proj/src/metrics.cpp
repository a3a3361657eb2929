#include "daadb/metrics.hpp"

#include <cmath>

#include "daadb/error.hpp"

namespace daadb {

double harmonic_mean(double a, double b) { return a + b > 0.0 ? 2.0 * a * b / (a + b) : 0.0; }

MetricsReport evaluate(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred, std::size_t num_known) {
    if (y_true.size() != y_pred.size()) throw ContractError("y_true and y_pred differ in length");
    if (y_true.empty()) throw ContractError("cannot evaluate an empty prediction set");
    const std::size_t c = num_known + 1;

    MetricsReport r;
    r.confusion.assign(c, std::vector<std::size_t>(c, 0));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] >= c || y_pred[i] >= c) throw ContractError("class index out of range");
        ++r.confusion[y_true[i]][y_pred[i]];
        correct += y_true[i] == y_pred[i];
    }
    r.acc = static_cast<double>(correct) / static_cast<double>(y_true.size());

    r.per_class.resize(c);
    for (std::size_t k = 0; k < c; ++k) {
        std::size_t predicted = 0, actual = 0;
        for (std::size_t j = 0; j < c; ++j) {
            predicted += r.confusion[j][k];
            actual += r.confusion[k][j];
        }
        const double tp = static_cast<double>(r.confusion[k][k]);
        auto& s = r.per_class[k];
        s.support = actual;
        s.precision = predicted > 0 ? tp / static_cast<double>(predicted) : 0.0;
        s.recall = actual > 0 ? tp / static_cast<double>(actual) : 0.0;
        s.f1 = harmonic_mean(s.precision, s.recall);
    }

    auto macro = [&](std::size_t count) {
        double p = 0.0, rec = 0.0;
        for (std::size_t k = 0; k < count; ++k) {
            p += r.per_class[k].precision;
            rec += r.per_class[k].recall;
        }
        return harmonic_mean(p / static_cast<double>(count), rec / static_cast<double>(count));
    };
    r.f1_all = macro(c);
    r.f1_known = num_known > 0 ? macro(num_known) : 0.0;
    r.f1_open = r.per_class[num_known].f1;
    double f1_sum = 0.0;
    for (const auto& s : r.per_class) f1_sum += s.f1;
    r.macro_f1_mean = f1_sum / static_cast<double>(c);
    return r;
}

namespace {

void mean_std(std::span<const MetricsReport> reports, double MetricsReport::*field, double& mean, double& sd) {
    const double n = static_cast<double>(reports.size());
    mean = 0.0;
    for (const auto& r : reports) mean += r.*field;
    mean /= n;
    sd = 0.0;
    if (reports.size() < 2) return;
    for (const auto& r : reports) sd += (r.*field - mean) * (r.*field - mean);
    sd = std::sqrt(sd / (n - 1.0));
}

}  // namespace

MetricsSummary aggregate_runs(std::span<const MetricsReport> reports) {
    if (reports.empty()) throw ContractError("aggregate_runs needs at least one report");
    MetricsSummary s;
    s.runs = reports.size();
    mean_std(reports, &MetricsReport::acc, s.acc_mean, s.acc_std);
    mean_std(reports, &MetricsReport::f1_all, s.f1_all_mean, s.f1_all_std);
    mean_std(reports, &MetricsReport::f1_known, s.f1_known_mean, s.f1_known_std);
    mean_std(reports, &MetricsReport::f1_open, s.f1_open_mean, s.f1_open_std);
    mean_std(reports, &MetricsReport::macro_f1_mean, s.macro_f1_mean_mean, s.macro_f1_mean_std);
    return s;
}

nlohmann::json to_json(const MetricsReport& report, const std::vector<std::string>& class_names) {
    nlohmann::json per_class = nlohmann::json::array();
    for (std::size_t k = 0; k < report.per_class.size(); ++k) {
        const auto& s = report.per_class[k];
        nlohmann::json row = {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}, {"support", s.support}};
        if (k < class_names.size()) row["class"] = class_names[k];
        per_class.push_back(std::move(row));
    }
    return {{"acc", report.acc},
            {"f1", report.f1_all},
            {"f1_known", report.f1_known},
            {"f1_open", report.f1_open},
            {"macro_f1_mean", report.macro_f1_mean},
            {"per_class", std::move(per_class)},
            {"confusion", report.confusion}};
}

nlohmann::json to_json(const MetricsSummary& s) {
    return {{"runs", s.runs},
            {"acc", {{"mean", s.acc_mean}, {"std", s.acc_std}}},
            {"f1", {{"mean", s.f1_all_mean}, {"std", s.f1_all_std}}},
            {"f1_known", {{"mean", s.f1_known_mean}, {"std", s.f1_known_std}}},
            {"f1_open", {{"mean", s.f1_open_mean}, {"std", s.f1_open_std}}},
            {"macro_f1_mean", {{"mean", s.macro_f1_mean_mean}, {"std", s.macro_f1_mean_std}}}};
}

MetricsSummary summary_from_json(const nlohmann::json& j) {
    MetricsSummary s;
    s.runs = j.at("runs").get<std::size_t>();
    auto read = [&](const char* key, double& mean, double& sd) {
        mean = j.at(key).at("mean").get<double>();
        sd = j.at(key).at("std").get<double>();
    };
    read("acc", s.acc_mean, s.acc_std);
    read("f1", s.f1_all_mean, s.f1_all_std);
    read("f1_known", s.f1_known_mean, s.f1_known_std);
    read("f1_open", s.f1_open_mean, s.f1_open_std);
    read("macro_f1_mean", s.macro_f1_mean_mean, s.macro_f1_mean_std);
    return s;
}

}  // namespace daadb
