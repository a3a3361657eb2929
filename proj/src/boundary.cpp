#include "daadb/boundary.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "daadb/error.hpp"
#include "daadb/random.hpp"

namespace daadb {

double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

double inverse_softplus(double y) {
    if (!(y > 0.0)) throw ContractError("inverse softplus needs a positive argument");
    // log(exp(y) - 1) = y + log(1 - exp(-y))
    if (y > 1.0) return y + std::log(-std::expm1(-y));
    return std::log(std::expm1(y));
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

BoundarySet BoundarySet::from_raw(std::vector<double> raw, Centroids centroids) {
    BoundarySet b{std::move(raw), {}, std::move(centroids)};
    b.radius.reserve(b.raw.size());
    for (double r : b.raw) b.radius.push_back(softplus(r));
    return b;
}

BoundarySet BoundarySet::from_radius(std::vector<double> radius, Centroids centroids) {
    BoundarySet b{{}, std::move(radius), std::move(centroids)};
    b.raw.reserve(b.radius.size());
    for (double r : b.radius) b.raw.push_back(inverse_softplus(r));
    return b;
}

BoundarySet init_boundaries(std::size_t num_classes, std::uint64_t seed) {
    if (num_classes == 0) throw ContractError("need at least one class");
    Rng rng(derive_seed(seed, streams::boundary_init));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> raw(num_classes);
    for (double& r : raw) r = normal(rng);
    return BoundarySet::from_raw(std::move(raw));
}

std::vector<double> distances_to_own_centroid(const Matrix& z, std::span<const std::size_t> labels,
                                              const Centroids& centroids) {
    if (labels.size() != z.rows()) throw ShapeError("labels and features differ in length");
    if (z.cols() != centroids.dim()) throw ShapeError("feature and centroid dims differ");
    std::vector<double> d(z.rows());
    for (std::size_t i = 0; i < z.rows(); ++i) {
        if (labels[i] >= centroids.num_classes()) throw ContractError("label out of range");
        d[i] = euclidean_distance(z.row(i), centroids.matrix.row(labels[i]));
    }
    return d;
}

double boundary_loss(const Matrix& z, std::span<const std::size_t> labels, const BoundarySet& b) {
    const auto d = distances_to_own_centroid(z, labels, b.centroids);
    if (d.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double r = b.radius.at(labels[i]);
        total += d[i] > r ? d[i] - r : r - d[i];
    }
    return total / static_cast<double>(d.size());
}

double boundary_gradient(std::span<const double> distances, std::span<const std::size_t> labels,
                         const BoundarySet& b, std::size_t k) {
    if (k >= b.num_classes()) throw ContractError("class index out of range");
    const double r = b.radius[k];
    long long signed_sum = 0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != k) continue;
        ++count;
        // inside (delta = 0) contributes +1, outside -1
        signed_sum += distances[i] > r ? -1 : 1;
    }
    if (count == 0) throw ContractError("class " + std::to_string(k) + " has no samples in the batch");
    return static_cast<double>(signed_sum) / static_cast<double>(count) * sigmoid(b.raw[k]);
}

double boundary_gradient(const Matrix& z, std::span<const std::size_t> labels, const BoundarySet& b, std::size_t k) {
    return boundary_gradient(distances_to_own_centroid(z, labels, b.centroids), labels, b, k);
}

BoundaryFit fit_boundaries(const Matrix& z_train, std::span<const std::size_t> labels, const Centroids& centroids,
                           const BoundaryTrainConfig& config) {
    if (!(config.learning_rate > 0.0)) throw ContractError("boundary learning rate must be positive");
    if (!(config.tolerance > 0.0)) throw ContractError("boundary tolerance must be positive");

    const std::size_t k_count = centroids.num_classes();
    const auto dist = distances_to_own_centroid(z_train, labels, centroids);
    BoundaryFit fit;
    fit.boundaries = init_boundaries(k_count, config.seed);
    fit.boundaries.centroids = centroids;
    auto& b = fit.boundaries;

    std::vector<double> m(k_count, 0.0), v(k_count, 0.0);
    std::vector<std::size_t> t(k_count, 0);
    const std::size_t n = dist.size();
    const std::size_t batch = config.batch_size == 0 ? std::max<std::size_t>(n, 1) : config.batch_size;

    Rng rng(derive_seed(config.seed, streams::boundary_order));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> batch_dist;
    std::vector<std::size_t> batch_labels;
    std::vector<std::size_t> present(k_count);
    std::size_t calm = 0;

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        const std::vector<double> before = b.radius;
        if (batch < n) std::shuffle(order.begin(), order.end(), rng);

        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t stop = std::min(n, start + batch);
            batch_dist.clear();
            batch_labels.clear();
            std::fill(present.begin(), present.end(), 0);
            for (std::size_t i = start; i < stop; ++i) {
                batch_dist.push_back(dist[order[i]]);
                batch_labels.push_back(labels[order[i]]);
                ++present[labels[order[i]]];
            }
            for (std::size_t k = 0; k < k_count; ++k) {
                // Classes without samples in this batch keep their parameter and moments.
                if (present[k] == 0) continue;
                const double g = boundary_gradient(batch_dist, batch_labels, b, k);
                ++t[k];
                m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g;
                v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g * g;
                const double m_hat = m[k] / (1.0 - std::pow(config.beta1, static_cast<double>(t[k])));
                const double v_hat = v[k] / (1.0 - std::pow(config.beta2, static_cast<double>(t[k])));
                b.raw[k] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
                if (!std::isfinite(b.raw[k])) {
                    throw TrainingError("non-finite boundary parameter for class " + std::to_string(k) +
                                        " at epoch " + std::to_string(epoch));
                }
                b.radius[k] = softplus(b.raw[k]);
            }
        }

        fit.epochs = epoch;
        fit.radius_history.push_back(b.radius);
        double change = 0.0;
        for (std::size_t k = 0; k < k_count; ++k) change += std::abs(b.radius[k] - before[k]);
        change /= static_cast<double>(k_count);
        calm = change < config.tolerance ? calm + 1 : 0;
        if (calm >= config.stable_epochs) {
            fit.converged = true;
            break;
        }
    }
    return fit;
}

}  // namespace daadb
