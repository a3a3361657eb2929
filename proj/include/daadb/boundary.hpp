#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "daadb/matrix.hpp"
#include "daadb/representation.hpp"

namespace daadb {

// log(1 + exp(x)) without overflow.
double softplus(double x);
// Inverse of softplus for y > 0.
double inverse_softplus(double y);
double sigmoid(double x);

// One ball per known class: centre from `centroids`, radius softplus(raw).
struct BoundarySet {
    std::vector<double> raw;
    std::vector<double> radius;
    Centroids centroids;

    [[nodiscard]] std::size_t num_classes() const noexcept { return raw.size(); }
    static BoundarySet from_raw(std::vector<double> raw, Centroids centroids = {});
    static BoundarySet from_radius(std::vector<double> radius, Centroids centroids = {});

    friend bool operator==(const BoundarySet&, const BoundarySet&) = default;
};

// raw ~ N(0, 1), seeded.
BoundarySet init_boundaries(std::size_t num_classes, std::uint64_t seed);

// d_i = |z_i - c_{y_i}|
std::vector<double> distances_to_own_centroid(const Matrix& z, std::span<const std::size_t> labels,
                                              const Centroids& centroids);

// mean_i [delta_i (d_i - r_{y_i}) + (1 - delta_i)(r_{y_i} - d_i)], delta_i = [d_i > r_{y_i}]
double boundary_loss(const Matrix& z, std::span<const std::size_t> labels, const BoundarySet& b);

// Closed-form dL/draw_k over the class-k samples: mean of (-1)^delta_i times sigmoid(raw_k).
double boundary_gradient(const Matrix& z, std::span<const std::size_t> labels, const BoundarySet& b, std::size_t k);
// Same, on precomputed own-centroid distances.
double boundary_gradient(std::span<const double> distances, std::span<const std::size_t> labels,
                         const BoundarySet& b, std::size_t k);

struct BoundaryTrainConfig {
    double learning_rate = 0.05;
    std::size_t max_epochs = 200;
    double tolerance = 1e-4;          // mean |radius change| over one epoch
    std::size_t stable_epochs = 3;    // consecutive epochs under tolerance
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t batch_size = 0;       // 0: one full batch per epoch
    std::uint64_t seed = 0;
};

struct BoundaryFit {
    BoundarySet boundaries;
    std::size_t epochs = 0;
    bool converged = false;
    std::vector<std::vector<double>> radius_history;  // radii after each epoch
};

// Adam on the raw parameters with the closed-form gradient. Features and centroids are read-only.
BoundaryFit fit_boundaries(const Matrix& z_train, std::span<const std::size_t> labels, const Centroids& centroids,
                           const BoundaryTrainConfig& config);

}  // namespace daadb
