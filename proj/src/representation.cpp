#include "daadb/representation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "daadb/error.hpp"
#include "daadb/random.hpp"

namespace daadb {

Centroids compute_centroids(const Matrix& z, std::span<const std::size_t> labels, std::size_t num_classes) {
    if (labels.size() != z.rows()) throw ShapeError("labels and features differ in length");
    Centroids c{Matrix(num_classes, z.cols()), std::vector<std::size_t>(num_classes, 0)};
    for (std::size_t i = 0; i < z.rows(); ++i) {
        const std::size_t k = labels[i];
        if (k >= num_classes) throw ContractError("label " + std::to_string(k) + " out of range");
        auto dst = c.matrix.row(k);
        auto src = z.row(i);
        for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
        ++c.counts[k];
    }
    for (std::size_t k = 0; k < num_classes; ++k) {
        if (c.counts[k] == 0) throw ContractError("class " + std::to_string(k) + " has no samples; centroid undefined");
        const double n = static_cast<double>(c.counts[k]);
        for (double& v : c.matrix.row(k)) v /= n;
    }
    return c;
}

NearestPair nearest_two(std::span<const double> z, const Centroids& centroids) {
    const std::size_t k = centroids.num_classes();
    if (k < 2) throw ContractError("nearest_two needs at least 2 centroids");
    if (z.size() != centroids.dim()) throw ShapeError("feature and centroid dimensions differ");
    constexpr double inf = std::numeric_limits<double>::infinity();
    NearestPair p{0, 0, inf, inf};
    for (std::size_t c = 0; c < k; ++c) {
        const double d = euclidean_distance(z, centroids.matrix.row(c));
        if (d < p.nearest_distance) {
            p.runner_up = p.nearest;
            p.runner_up_distance = p.nearest_distance;
            p.nearest = c;
            p.nearest_distance = d;
        } else if (d < p.runner_up_distance) {
            p.runner_up = c;
            p.runner_up_distance = d;
        }
    }
    return p;
}

double distance_coefficient(double nearest_distance, double runner_up_distance) {
    if (!(nearest_distance >= 0.0 && nearest_distance <= runner_up_distance)) {
        throw ContractError("distance_coefficient requires 0 <= d_a <= d_b");
    }
    return std::exp(runner_up_distance - nearest_distance);
}

std::vector<double> squash(std::span<const double> v) {
    const double sq = dot(v, v);
    std::vector<double> out(v.begin(), v.end());
    if (sq == 0.0) return out;
    // |v|^2 / (1 + |v|^2) * v / |v|
    const double scale = std::sqrt(sq) / (1.0 + sq);
    for (double& x : out) x *= scale;
    return out;
}

DistanceAwareBatch distance_aware(const Matrix& z, const Centroids& centroids) {
    DistanceAwareBatch b{{}, {}, z};
    b.pairs.reserve(z.rows());
    b.gamma.reserve(z.rows());
    for (std::size_t i = 0; i < z.rows(); ++i) {
        const auto p = nearest_two(z.row(i), centroids);
        const double g = distance_coefficient(p.nearest_distance, p.runner_up_distance);
        b.pairs.push_back(p);
        b.gamma.push_back(g);
        for (double& v : b.meta.row(i)) v *= g;
    }
    return b;
}

CosineClassifier init_classifier(std::size_t num_classes, std::size_t feature_dim, double alpha,
                                 HeadKind kind, std::uint64_t seed) {
    if (num_classes < 2) throw ContractError("classifier needs at least 2 classes");
    if (!(alpha > 0.0)) throw ContractError("alpha must be positive");
    Rng rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(feature_dim));
    std::uniform_real_distribution<double> dist(-bound, bound);
    CosineClassifier clf{Matrix(num_classes, feature_dim), alpha, kind};
    for (double& w : clf.weights.data()) w = dist(rng);
    return clf;
}

namespace {

// Unit-norm (cosine) or raw (linear) class weights.
Matrix effective_weights(const CosineClassifier& clf) {
    Matrix w = clf.weights;
    if (clf.kind == HeadKind::linear) return w;
    for (std::size_t k = 0; k < w.rows(); ++k) {
        auto row = w.row(k);
        const double n = norm(row);
        if (!(n > 0.0)) throw ContractError("classifier weight row " + std::to_string(k) + " has zero norm");
        for (double& v : row) v /= n;
    }
    return w;
}

void logits_into(std::span<const double> meta, const CosineClassifier& clf, const Matrix& w_eff,
                 std::span<double> out) {
    if (meta.size() != clf.weights.cols()) throw ShapeError("meta-embedding and classifier dims differ");
    std::vector<double> s = clf.kind == HeadKind::cosine ? squash(meta) : std::vector<double>(meta.begin(), meta.end());
    for (std::size_t k = 0; k < w_eff.rows(); ++k) out[k] = clf.alpha * dot(s, w_eff.row(k));
}

}  // namespace

std::vector<double> logits(std::span<const double> meta, const CosineClassifier& clf) {
    const Matrix w = effective_weights(clf);
    std::vector<double> out(clf.num_classes());
    logits_into(meta, clf, w, out);
    return out;
}

Matrix logits(const Matrix& meta, const CosineClassifier& clf) {
    const Matrix w = effective_weights(clf);
    Matrix out(meta.rows(), clf.num_classes());
    for (std::size_t i = 0; i < meta.rows(); ++i) logits_into(meta.row(i), clf, w, out.row(i));
    return out;
}

std::vector<double> softmax(std::span<const double> logit_row) {
    std::vector<double> p(logit_row.begin(), logit_row.end());
    if (p.empty()) return p;
    const double mx = *std::max_element(p.begin(), p.end());
    double sum = 0.0;
    for (double& v : p) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double& v : p) v /= sum;
    return p;
}

double softmax_loss(const Matrix& logit_rows, std::span<const std::size_t> labels) {
    if (labels.size() != logit_rows.rows()) throw ShapeError("labels and logits differ in length");
    if (labels.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < logit_rows.rows(); ++i) {
        auto row = logit_rows.row(i);
        if (labels[i] >= row.size()) throw ContractError("label out of range");
        const double mx = *std::max_element(row.begin(), row.end());
        double sum = 0.0;
        for (double v : row) sum += std::exp(v - mx);
        total += mx + std::log(sum) - row[labels[i]];
    }
    return total / static_cast<double>(labels.size());
}

double loss_and_gradient(const RepresentationModel& model, const Matrix& x, std::span<const std::size_t> labels,
                         std::span<const double> gamma, Gradients* grad) {
    const auto& enc = model.encoder;
    const auto& clf = model.classifier;
    const std::size_t n = x.rows();
    const std::size_t d = enc.feature_dim();
    const std::size_t k_count = clf.num_classes();
    if (labels.size() != n || gamma.size() != n) throw ShapeError("labels/gamma do not match batch size");
    if (clf.weights.cols() != d) throw ShapeError("classifier and head feature dims differ");
    if (n == 0) return 0.0;

    const Matrix pre = head_preactivation(x, enc);
    const Matrix w_eff = effective_weights(clf);
    const bool cosine = clf.kind == HeadKind::cosine;
    const double inv_n = 1.0 / static_cast<double>(n);

    Matrix d_weff;
    if (grad) {
        grad->encoder_weights = Matrix(enc.input_dim(), d);
        grad->encoder_bias.assign(d, 0.0);
        d_weff = Matrix(k_count, d);
    }

    std::vector<double> m(d), s(d), logit(k_count), ds(d), dpre(d);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        auto p = pre.row(i);
        for (std::size_t j = 0; j < d; ++j) m[j] = gamma[i] * std::max(p[j], 0.0);
        const double r2 = dot(m, m);
        const double r = std::sqrt(r2);
        const double f = cosine ? r / (1.0 + r2) : 1.0;
        for (std::size_t j = 0; j < d; ++j) s[j] = f * m[j];

        for (std::size_t k = 0; k < k_count; ++k) logit[k] = clf.alpha * dot(s, w_eff.row(k));
        const std::size_t y = labels[i];
        if (y >= k_count) throw ContractError("label out of range");
        const double mx = *std::max_element(logit.begin(), logit.end());
        double sum = 0.0;
        for (double v : logit) sum += std::exp(v - mx);
        total += mx + std::log(sum) - logit[y];
        if (!grad) continue;

        // dL/dlogit = (softmax - onehot) / N
        std::fill(ds.begin(), ds.end(), 0.0);
        for (std::size_t k = 0; k < k_count; ++k) {
            const double g = (std::exp(logit[k] - mx) / sum - (k == y ? 1.0 : 0.0)) * inv_n;
            auto wk = w_eff.row(k);
            auto dwk = d_weff.row(k);
            for (std::size_t j = 0; j < d; ++j) {
                ds[j] += clf.alpha * g * wk[j];
                dwk[j] += clf.alpha * g * s[j];
            }
        }

        // Squash Jacobian: f(r) I + (f'(r) / r) m m^T with f(r) = r / (1 + r^2).
        if (cosine) {
            if (r == 0.0) {
                std::fill(ds.begin(), ds.end(), 0.0);
            } else {
                const double fprime_over_r = (1.0 - r2) / ((1.0 + r2) * (1.0 + r2) * r);
                const double mds = dot(m, ds);
                for (std::size_t j = 0; j < d; ++j) ds[j] = f * ds[j] + fprime_over_r * mds * m[j];
            }
        }
        for (std::size_t j = 0; j < d; ++j) dpre[j] = p[j] > 0.0 ? gamma[i] * ds[j] : 0.0;

        auto xi = x.row(i);
        for (std::size_t a = 0; a < xi.size(); ++a) {
            if (xi[a] == 0.0) continue;
            auto dw = grad->encoder_weights.row(a);
            for (std::size_t j = 0; j < d; ++j) dw[j] += xi[a] * dpre[j];
        }
        for (std::size_t j = 0; j < d; ++j) grad->encoder_bias[j] += dpre[j];
    }

    if (grad) {
        grad->classifier_weights = Matrix(k_count, d);
        for (std::size_t k = 0; k < k_count; ++k) {
            auto out = grad->classifier_weights.row(k);
            auto dw = d_weff.row(k);
            if (!cosine) {
                std::copy(dw.begin(), dw.end(), out.begin());
                continue;
            }
            // Through w / |w|: (I - w_hat w_hat^T) / |w|
            const double wn = norm(clf.weights.row(k));
            auto wh = w_eff.row(k);
            const double proj = dot(wh, dw);
            for (std::size_t j = 0; j < d; ++j) out[j] = (dw[j] - wh[j] * proj) / wn;
        }
    }
    return total * inv_n;
}

std::vector<double> sample_gammas(const RepresentationModel& model, const Matrix& x, const Centroids& centroids) {
    if (!model.distance_aware) return std::vector<double>(x.rows(), 1.0);
    return distance_aware(forward_head(x, model.encoder), centroids).gamma;
}

std::vector<std::size_t> predict_known(const RepresentationModel& model, const Matrix& x) {
    const Matrix l = logits(forward_head(x, model.encoder), model.classifier);
    std::vector<std::size_t> out(l.rows());
    for (std::size_t i = 0; i < l.rows(); ++i) {
        auto row = l.row(i);
        out[i] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    return out;
}

Matrix class_probabilities(const RepresentationModel& model, const Matrix& x) {
    Matrix l = logits(forward_head(x, model.encoder), model.classifier);
    for (std::size_t i = 0; i < l.rows(); ++i) {
        auto p = softmax(l.row(i));
        std::copy(p.begin(), p.end(), l.row(i).begin());
    }
    return l;
}

namespace {

double accuracy(const RepresentationModel& model, const Matrix& x, std::span<const std::size_t> labels) {
    if (labels.empty()) return 0.0;
    const auto pred = predict_known(model, x);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == labels[i];
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

}  // namespace

TrainedRepresentation train_representation(const Matrix& x_train, std::span<const std::size_t> train_labels,
                                           const Matrix& x_valid, std::span<const std::size_t> valid_labels,
                                           std::size_t num_classes, const RepTrainConfig& config) {
    if (num_classes < 2) throw ContractError("representation training needs K >= 2 known classes");
    if (train_labels.size() != x_train.rows()) throw ShapeError("training labels and features differ in length");
    if (valid_labels.size() != x_valid.rows()) throw ShapeError("validation labels and features differ in length");
    if (config.batch_size == 0) throw ContractError("batch size must be positive");

    TrainedRepresentation out;
    out.model.encoder = init_encoder(x_train.cols(), config.feature_dim, derive_seed(config.seed, streams::encoder_init));
    out.model.classifier = init_classifier(num_classes, config.feature_dim, config.alpha, config.head,
                                           derive_seed(config.seed, streams::classifier_init));
    out.model.distance_aware = config.distance_aware;

    // Without validation rows, model selection falls back to training accuracy.
    const bool has_valid = x_valid.rows() > 0;
    const Matrix& sel_x = has_valid ? x_valid : x_train;
    const auto sel_y = has_valid ? valid_labels : train_labels;

    RepresentationModel model = out.model;
    out.best_valid_accuracy = accuracy(model, sel_x, sel_y);
    double best_valid_loss = std::numeric_limits<double>::infinity();

    Rng rng(derive_seed(config.seed, streams::batch_order));
    std::vector<std::size_t> order(x_train.rows());
    std::iota(order.begin(), order.end(), 0);
    std::size_t since_best = 0;
    Gradients grad;

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        const Centroids centroids = compute_centroids(forward_head(x_train, model.encoder), train_labels, num_classes);
        std::shuffle(order.begin(), order.end(), rng);

        double epoch_loss = 0.0;
        std::size_t step = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++step) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            const std::span<const std::size_t> idx(order.data() + start, stop - start);
            const Matrix xb = x_train.select_rows(idx);
            std::vector<std::size_t> yb(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) yb[i] = train_labels[idx[i]];
            const auto gb = sample_gammas(model, xb, centroids);

            const double loss = loss_and_gradient(model, xb, yb, gb, &grad);
            if (!std::isfinite(loss)) {
                throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", step " + std::to_string(step));
            }
            epoch_loss += loss * static_cast<double>(idx.size());

            const double lr = config.learning_rate;
            auto& w = model.encoder.weights.data();
            const auto& gw = grad.encoder_weights.data();
            for (std::size_t j = 0; j < w.size(); ++j) w[j] -= lr * gw[j];
            for (std::size_t j = 0; j < model.encoder.bias.size(); ++j) model.encoder.bias[j] -= lr * grad.encoder_bias[j];
            auto& c = model.classifier.weights.data();
            const auto& gc = grad.classifier_weights.data();
            for (std::size_t j = 0; j < c.size(); ++j) c[j] -= lr * gc[j];
        }
        if (!model.encoder.weights.all_finite() || !model.classifier.weights.all_finite()) {
            throw TrainingError("non-finite parameters after epoch " + std::to_string(epoch));
        }

        const double acc = accuracy(model, sel_x, sel_y);
        const double valid_loss =
            loss_and_gradient(model, sel_x, sel_y, sample_gammas(model, sel_x, centroids), nullptr);
        out.history.push_back({epoch, epoch_loss / static_cast<double>(order.size()), acc, valid_loss});
        // Accuracy ties are broken by the validation loss.
        if (acc > out.best_valid_accuracy || (acc == out.best_valid_accuracy && valid_loss < best_valid_loss)) {
            out.best_valid_accuracy = acc;
            best_valid_loss = valid_loss;
            out.best_epoch = epoch;
            out.model = model;
            since_best = 0;
        } else if (++since_best >= config.patience) {
            break;
        }
    }

    out.centroids = compute_centroids(forward_head(x_train, out.model.encoder), train_labels, num_classes);
    return out;
}

double GradientCheckReport::max_error() const noexcept {
    return std::max({encoder_weights, encoder_bias, classifier_weights});
}

Gradients numeric_gradient(const RepresentationModel& model, const Matrix& x, std::span<const std::size_t> labels,
                           std::span<const double> gamma, double step) {
    RepresentationModel probe = model;
    auto central = [&](double& param) {
        const double saved = param;
        param = saved + step;
        const double up = loss_and_gradient(probe, x, labels, gamma, nullptr);
        param = saved - step;
        const double down = loss_and_gradient(probe, x, labels, gamma, nullptr);
        param = saved;
        return (up - down) / (2.0 * step);
    };
    Gradients g{Matrix(model.encoder.input_dim(), model.encoder.feature_dim()),
                std::vector<double>(model.encoder.feature_dim()),
                Matrix(model.classifier.weights.rows(), model.classifier.weights.cols())};
    for (std::size_t j = 0; j < g.encoder_weights.data().size(); ++j) {
        g.encoder_weights.data()[j] = central(probe.encoder.weights.data()[j]);
    }
    for (std::size_t j = 0; j < g.encoder_bias.size(); ++j) g.encoder_bias[j] = central(probe.encoder.bias[j]);
    for (std::size_t j = 0; j < g.classifier_weights.data().size(); ++j) {
        g.classifier_weights.data()[j] = central(probe.classifier.weights.data()[j]);
    }
    return g;
}

namespace {

double max_relative_error(std::span<const double> a, std::span<const double> n) {
    if (a.size() != n.size()) throw ShapeError("gradient blocks differ in size");
    constexpr double floor = 1e-7;
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double denom = std::max({std::abs(a[i]), std::abs(n[i]), floor});
        worst = std::max(worst, std::abs(a[i] - n[i]) / denom);
    }
    return worst;
}

}  // namespace

GradientCheckReport compare_gradients(const Gradients& analytic, const Gradients& numeric) {
    return {max_relative_error(analytic.encoder_weights.data(), numeric.encoder_weights.data()),
            max_relative_error(analytic.encoder_bias, numeric.encoder_bias),
            max_relative_error(analytic.classifier_weights.data(), numeric.classifier_weights.data())};
}

GradientCheckReport gradient_check(const RepresentationModel& model, const Matrix& x,
                                   std::span<const std::size_t> labels, std::span<const double> gamma, double step) {
    Gradients analytic;
    loss_and_gradient(model, x, labels, gamma, &analytic);
    return compare_gradients(analytic, numeric_gradient(model, x, labels, gamma, step));
}

}  // namespace daadb
