#pragma once

#include <span>
#include <vector>

#include "daadb/boundary.hpp"
#include "daadb/representation.hpp"

namespace daadb {

struct Prediction {
    std::size_t class_index = 0;    // == K for Open
    std::size_t nearest_known = 0;
    double distance = 0;
    double radius_used = 0;
};

// Nearest centroid (ties to the lower index); Open when the distance exceeds that class's radius.
Prediction classify(std::span<const double> z, const Centroids& centroids, const BoundarySet& boundaries);
std::vector<Prediction> classify(const Matrix& z, const Centroids& centroids, const BoundarySet& boundaries);
std::vector<std::size_t> class_indices(const std::vector<Prediction>& predictions);

inline constexpr double kMspThreshold = 0.5;

// argmax, or K (Open) when the top probability is below the threshold.
std::size_t classify_msp(std::span<const double> probabilities, double threshold = kMspThreshold);
std::vector<std::size_t> classify_msp(const Matrix& probabilities, double threshold = kMspThreshold);

BoundarySet scale_radii(const BoundarySet& boundaries, double factor);

}  // namespace daadb
