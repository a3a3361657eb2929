#include "daadb/synthetic.hpp"

#include <string>

#include "daadb/error.hpp"
#include "daadb/random.hpp"

namespace daadb {

namespace {

std::string class_name(std::size_t k) { return "class_" + std::to_string(k); }

void gaussian_rows(Rng& rng, const Matrix& means, double sigma, std::size_t per_class, const std::string& tag,
                   std::vector<Utterance>& rows, std::vector<double>& data) {
    std::normal_distribution<double> noise(0.0, sigma);
    for (std::size_t k = 0; k < means.rows(); ++k) {
        for (std::size_t i = 0; i < per_class; ++i) {
            rows.push_back({tag + "-" + std::to_string(rows.size()), class_name(k)});
            for (double mu : means.row(k)) data.push_back(mu + noise(rng));
        }
    }
}

}  // namespace

SyntheticCorpus make_synthetic(const SyntheticSpec& spec) {
    if (spec.num_classes < 2 || spec.dim == 0) throw ContractError("synthetic data needs >= 2 classes and dim >= 1");
    if (!(spec.sigma > 0.0) || !(spec.spread > 0.0)) throw ContractError("synthetic sigma and spread must be positive");

    Rng rng(spec.seed);
    std::uniform_real_distribution<double> box(-spec.spread, spec.spread);
    SyntheticCorpus out;
    out.means = Matrix(spec.num_classes, spec.dim);
    std::size_t placed = 0;
    for (std::size_t attempt = 0; placed < spec.num_classes; ++attempt) {
        if (attempt > 100000) throw ContractError("cannot place synthetic means with the requested separation");
        auto candidate = out.means.row(placed);
        for (double& v : candidate) v = box(rng);
        bool ok = true;
        for (std::size_t j = 0; j < placed && ok; ++j) {
            ok = euclidean_distance(candidate, out.means.row(j)) >= spec.min_separation;
        }
        if (ok) ++placed;
    }

    std::vector<double> train, valid, test;
    gaussian_rows(rng, out.means, spec.sigma, spec.train_per_class, "train", out.train, train);
    gaussian_rows(rng, out.means, spec.sigma, spec.valid_per_class, "valid", out.valid, valid);
    gaussian_rows(rng, out.means, spec.sigma, spec.test_per_class, "test", out.test, test);
    std::uniform_real_distribution<double> open(-spec.open_extent, spec.open_extent);
    for (std::size_t i = 0; i < spec.open_test; ++i) {
        out.test.push_back({"test-" + std::to_string(out.test.size()), kSyntheticOpenLabel});
        for (std::size_t j = 0; j < spec.dim; ++j) test.push_back(open(rng));
    }
    out.train_x = Matrix(out.train.size(), spec.dim, std::move(train));
    out.valid_x = Matrix(out.valid.size(), spec.dim, std::move(valid));
    out.test_x = Matrix(out.test.size(), spec.dim, std::move(test));
    return out;
}

}  // namespace daadb
