#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "daadb/encoder.hpp"
#include "daadb/matrix.hpp"

namespace daadb {

// Per-class mean features; row k is the centroid of class k.
struct Centroids {
    Matrix matrix;
    std::vector<std::size_t> counts;

    [[nodiscard]] std::size_t num_classes() const noexcept { return matrix.rows(); }
    [[nodiscard]] std::size_t dim() const noexcept { return matrix.cols(); }

    friend bool operator==(const Centroids&, const Centroids&) = default;
};

Centroids compute_centroids(const Matrix& z, std::span<const std::size_t> labels, std::size_t num_classes);

struct NearestPair {
    std::size_t nearest = 0;       // k_a
    std::size_t runner_up = 0;     // k_b
    double nearest_distance = 0;   // d_a
    double runner_up_distance = 0; // d_b
};

// Nearest and next-nearest centroid; ties go to the lower class index.
NearestPair nearest_two(std::span<const double> z, const Centroids& centroids);

// exp(d_b - d_a), which is >= 1 because d_a <= d_b.
double distance_coefficient(double nearest_distance, double runner_up_distance);

// Rescales v to norm |v|^2 / (1 + |v|^2), keeping its direction.
std::vector<double> squash(std::span<const double> v);

struct DistanceAwareBatch {
    std::vector<NearestPair> pairs;
    std::vector<double> gamma;
    Matrix meta;  // gamma_i * z_i
};

DistanceAwareBatch distance_aware(const Matrix& z, const Centroids& centroids);

// cosine: logit_k = alpha * squash(meta) . w_k / |w_k|
// linear: logit_k = alpha * meta . w_k  (plain softmax head, no squashing or normalisation)
enum class HeadKind { cosine, linear };

struct CosineClassifier {
    Matrix weights;  // K x D
    double alpha = 4.0;
    HeadKind kind = HeadKind::cosine;

    [[nodiscard]] std::size_t num_classes() const noexcept { return weights.rows(); }

    friend bool operator==(const CosineClassifier&, const CosineClassifier&) = default;
};

CosineClassifier init_classifier(std::size_t num_classes, std::size_t feature_dim, double alpha,
                                 HeadKind kind, std::uint64_t seed);

std::vector<double> logits(std::span<const double> meta, const CosineClassifier& clf);
Matrix logits(const Matrix& meta, const CosineClassifier& clf);

std::vector<double> softmax(std::span<const double> logit_row);

// Mean negative log-probability of the true class.
double softmax_loss(const Matrix& logit_rows, std::span<const std::size_t> labels);

struct RepresentationModel {
    EncoderParams encoder;
    CosineClassifier classifier;
    bool distance_aware = true;  // false: gamma fixed to 1

    friend bool operator==(const RepresentationModel&, const RepresentationModel&) = default;
};

struct Gradients {
    Matrix encoder_weights;
    std::vector<double> encoder_bias;
    Matrix classifier_weights;
};

// Softmax loss over meta-embeddings gamma_i * z_i with gamma held constant, and its exact
// gradient with respect to the head and classifier parameters when `grad` is non-null.
double loss_and_gradient(const RepresentationModel& model, const Matrix& x, std::span<const std::size_t> labels,
                         std::span<const double> gamma, Gradients* grad);

// Gamma per row of x under the model's setting (all ones when distance-awareness is off).
std::vector<double> sample_gammas(const RepresentationModel& model, const Matrix& x, const Centroids& centroids);

// Closed-set argmax over the classifier logits.
std::vector<std::size_t> predict_known(const RepresentationModel& model, const Matrix& x);
// Class probabilities per row (gamma = 1; the argmax does not depend on gamma).
Matrix class_probabilities(const RepresentationModel& model, const Matrix& x);

struct RepTrainConfig {
    std::size_t feature_dim = 64;
    double alpha = 4.0;
    double learning_rate = 0.05;
    std::size_t batch_size = 128;
    std::size_t max_epochs = 100;
    std::size_t patience = 10;
    std::uint64_t seed = 0;
    bool distance_aware = true;
    HeadKind head = HeadKind::cosine;
};

struct EpochLog {
    std::size_t epoch = 0;
    double train_loss = 0;
    double valid_accuracy = 0;
    double valid_loss = 0;
};

struct TrainedRepresentation {
    RepresentationModel model;
    Centroids centroids;
    std::size_t best_epoch = 0;
    double best_valid_accuracy = 0;
    std::vector<EpochLog> history;
};

TrainedRepresentation train_representation(const Matrix& x_train, std::span<const std::size_t> train_labels,
                                           const Matrix& x_valid, std::span<const std::size_t> valid_labels,
                                           std::size_t num_classes, const RepTrainConfig& config);

struct GradientCheckReport {
    double encoder_weights = 0;  // max relative error per parameter block
    double encoder_bias = 0;
    double classifier_weights = 0;

    [[nodiscard]] double max_error() const noexcept;
    [[nodiscard]] bool passed(double tolerance) const noexcept { return max_error() < tolerance; }
};

// Central differences of loss_and_gradient's loss, one parameter at a time.
Gradients numeric_gradient(const RepresentationModel& model, const Matrix& x, std::span<const std::size_t> labels,
                           std::span<const double> gamma, double step = 1e-4);

// Relative error |a - n| / max(|a|, |n|, floor) with floor 1e-7.
GradientCheckReport compare_gradients(const Gradients& analytic, const Gradients& numeric);

GradientCheckReport gradient_check(const RepresentationModel& model, const Matrix& x,
                                   std::span<const std::size_t> labels, std::span<const double> gamma,
                                   double step = 1e-4);

}  // namespace daadb
