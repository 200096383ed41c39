#include "galev/linear_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "galev/errors.hpp"

namespace galev {

namespace {

void check_training_data(const LabeledFeatureSet& data, const TrainConfig& config) {
    if (data.features.empty()) throw ValidationError("train_linear: empty training set");
    if (data.num_classes < 2) {
        throw ValidationError("train_linear: num_classes must be >= 2");
    }
    const std::size_t dim = data.features.front().size();
    std::set<int> present;
    for (std::size_t i = 0; i < data.features.size(); ++i) {
        if (data.features[i].size() != dim) {
            throw ValidationError("train_linear: feature " + std::to_string(i) +
                                  " has dimension " + std::to_string(data.features[i].size()) +
                                  ", expected " + std::to_string(dim));
        }
        if (data.labels[i].empty()) {
            throw ValidationError("train_linear: item " + std::to_string(i) + " has no labels");
        }
        if (!config.multi_label && data.labels[i].size() != 1) {
            throw ValidationError("train_linear: multi-label item " + std::to_string(i) +
                                  " in single-label mode");
        }
        for (int c : data.labels[i]) {
            if (c < 0 || c >= data.num_classes) {
                throw ValidationError("train_linear: label out of range");
            }
            present.insert(c);
        }
    }
    if (present.size() < 2) {
        throw ValidationError("train_linear: training data contains fewer than 2 classes");
    }
    if (data.labels.size() != data.features.size()) {
        throw ValidationError("train_linear: features/labels length mismatch");
    }
}

double log_sum_exp(const Vec& z) {
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - m);
    return m + std::log(s);
}

// Numerically stable -[y log sigma(z) + (1-y) log(1 - sigma(z))].
double binary_cross_entropy(double z, double y) {
    return std::max(z, 0.0) - y * z + std::log1p(std::exp(-std::abs(z)));
}

} // namespace

LinearLossGrad linear_loss_gradient(const Matrix& weights, const Vec& bias,
                                    const LabeledFeatureSet& data, const TrainConfig& config) {
    const std::size_t num_classes = weights.rows;
    const std::size_t dim = weights.cols;
    const double inv_n = 1.0 / static_cast<double>(data.features.size());

    LinearLossGrad out;
    out.grad_weights = Matrix(num_classes, dim);
    out.grad_bias = Vec(num_classes, 0.0);

    for (std::size_t i = 0; i < data.features.size(); ++i) {
        const Vec& x = data.features[i];
        const Vec z = affine(weights, x, bias);

        Vec dz(num_classes);
        if (config.multi_label) {
            const Vec a = sigmoid_vec(z);
            for (std::size_t c = 0; c < num_classes; ++c) {
                const double y = data.labels[i].count(static_cast<int>(c)) ? 1.0 : 0.0;
                out.loss += inv_n * binary_cross_entropy(z[c], y);
                dz[c] = a[c] - y;
            }
        } else {
            const int y = *data.labels[i].begin();
            out.loss += inv_n * (log_sum_exp(z) - z[static_cast<std::size_t>(y)]);
            const Vec a = softmax(z);
            for (std::size_t c = 0; c < num_classes; ++c) {
                dz[c] = a[c] - (static_cast<int>(c) == y ? 1.0 : 0.0);
            }
        }

        for (std::size_t c = 0; c < num_classes; ++c) {
            const double g = inv_n * dz[c];
            out.grad_bias[c] += g;
            double* row = &out.grad_weights.data[c * dim];
            for (std::size_t d = 0; d < dim; ++d) row[d] += g * x[d];
        }
    }

    // Ridge penalty on weights only.
    if (config.l2_penalty > 0.0) {
        double sq = 0.0;
        for (std::size_t k = 0; k < weights.data.size(); ++k) {
            sq += weights.data[k] * weights.data[k];
            out.grad_weights.data[k] += config.l2_penalty * weights.data[k];
        }
        out.loss += 0.5 * config.l2_penalty * sq;
    }
    return out;
}

LinearModel train_linear(const LabeledFeatureSet& data, const TrainConfig& config) {
    check_training_data(data, config);
    if (config.learning_rate <= 0.0) throw ValidationError("train_linear: learning_rate <= 0");
    if (config.max_epochs < 1) throw ValidationError("train_linear: max_epochs < 1");

    const std::size_t num_classes = static_cast<std::size_t>(data.num_classes);
    const std::size_t dim = data.features.front().size();

    // Zero init: the objective is convex, so the optimum does not depend on
    // the starting point and no randomness enters training.
    Matrix weights(num_classes, dim);
    Vec bias(num_classes, 0.0);

    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double adam_eps = 1e-8;
    Matrix mw(num_classes, dim), vw(num_classes, dim);
    Vec mb(num_classes, 0.0), vb(num_classes, 0.0);

    Matrix best_weights = weights;
    Vec best_bias = bias;
    double best_loss = std::numeric_limits<double>::infinity();
    int stale_epochs = 0;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        const LinearLossGrad lg = linear_loss_gradient(weights, bias, data, config);
        if (lg.loss < best_loss) {
            best_loss = lg.loss;
            best_weights = weights;
            best_bias = bias;
            stale_epochs = 0;
        } else if (++stale_epochs > config.early_stop_patience) {
            break;
        }

        const double bc1 = 1.0 - std::pow(beta1, epoch);
        const double bc2 = 1.0 - std::pow(beta2, epoch);
        for (std::size_t k = 0; k < weights.data.size(); ++k) {
            const double g = lg.grad_weights.data[k];
            mw.data[k] = beta1 * mw.data[k] + (1.0 - beta1) * g;
            vw.data[k] = beta2 * vw.data[k] + (1.0 - beta2) * g * g;
            weights.data[k] -=
                config.learning_rate * (mw.data[k] / bc1) / (std::sqrt(vw.data[k] / bc2) + adam_eps);
        }
        for (std::size_t c = 0; c < num_classes; ++c) {
            const double g = lg.grad_bias[c];
            mb[c] = beta1 * mb[c] + (1.0 - beta1) * g;
            vb[c] = beta2 * vb[c] + (1.0 - beta2) * g * g;
            bias[c] -= config.learning_rate * (mb[c] / bc1) / (std::sqrt(vb[c] / bc2) + adam_eps);
        }
    }

    LinearModel model;
    model.weights = std::move(best_weights);
    model.bias = std::move(best_bias);
    model.kind = ScoreKind::probabilistic;
    model.multi_label = config.multi_label;
    return model;
}

Vec predict_scores(const LinearModel& model, const Vec& feature) {
    if (feature.size() != model.dim()) {
        throw ValidationError("predict_scores: feature has dimension " +
                              std::to_string(feature.size()) + ", model expects " +
                              std::to_string(model.dim()));
    }
    Vec z = affine(model.weights, feature, model.bias);
    if (model.kind == ScoreKind::margin) return z;
    return model.multi_label ? sigmoid_vec(z) : softmax(z);
}

std::size_t decide(const Vec& confidences) {
    if (confidences.empty()) throw ValidationError("decide: empty confidence vector");
    std::size_t best = 0;
    for (std::size_t c = 1; c < confidences.size(); ++c) {
        if (confidences[c] > confidences[best]) best = c;
    }
    return best;
}

} // namespace galev
