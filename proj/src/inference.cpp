#include "daadb/inference.hpp"

#include <algorithm>
#include <cmath>

#include "daadb/error.hpp"

namespace daadb {

Prediction classify(std::span<const double> z, const Centroids& centroids, const BoundarySet& boundaries) {
    const std::size_t k_count = centroids.num_classes();
    if (k_count == 0 || boundaries.num_classes() != k_count) {
        throw ContractError("centroids and boundaries must share K");
    }
    if (z.size() != centroids.dim()) throw ShapeError("feature and centroid dims differ");
    Prediction p;
    p.distance = euclidean_distance(z, centroids.matrix.row(0));
    for (std::size_t k = 1; k < k_count; ++k) {
        const double d = euclidean_distance(z, centroids.matrix.row(k));
        if (d < p.distance) {
            p.distance = d;
            p.nearest_known = k;
        }
    }
    p.radius_used = boundaries.radius[p.nearest_known];
    p.class_index = p.distance <= p.radius_used ? p.nearest_known : k_count;
    return p;
}

std::vector<Prediction> classify(const Matrix& z, const Centroids& centroids, const BoundarySet& boundaries) {
    std::vector<Prediction> out;
    out.reserve(z.rows());
    for (std::size_t i = 0; i < z.rows(); ++i) out.push_back(classify(z.row(i), centroids, boundaries));
    return out;
}

std::vector<std::size_t> class_indices(const std::vector<Prediction>& predictions) {
    std::vector<std::size_t> out;
    out.reserve(predictions.size());
    for (const auto& p : predictions) out.push_back(p.class_index);
    return out;
}

std::size_t classify_msp(std::span<const double> probabilities, double threshold) {
    if (probabilities.empty()) throw ContractError("empty probability vector");
    double sum = 0.0;
    for (double p : probabilities) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw ContractError("probabilities must be finite and non-negative");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw ContractError("probabilities must sum to 1");
    const auto top = std::max_element(probabilities.begin(), probabilities.end());
    if (*top < threshold) return probabilities.size();
    return static_cast<std::size_t>(top - probabilities.begin());
}

std::vector<std::size_t> classify_msp(const Matrix& probabilities, double threshold) {
    std::vector<std::size_t> out;
    out.reserve(probabilities.rows());
    for (std::size_t i = 0; i < probabilities.rows(); ++i) out.push_back(classify_msp(probabilities.row(i), threshold));
    return out;
}

BoundarySet scale_radii(const BoundarySet& boundaries, double factor) {
    if (!(factor > 0.0) || !std::isfinite(factor)) throw ContractError("radius scale factor must be positive");
    if (factor == 1.0) return boundaries;
    std::vector<double> radius = boundaries.radius;
    for (double& r : radius) r *= factor;
    return BoundarySet::from_radius(std::move(radius), boundaries.centroids);
}

}  // namespace daadb
