#pragma once

#include <cstdint>

#include "galev/gallery.hpp"
#include "galev/vector_math.hpp"

namespace galev {

enum class ScoreKind {
    probabilistic, // softmax (single-label) or per-class sigmoid (multi-label)
    margin,        // raw affine scores, may be negative
};

struct LinearModel {
    Matrix weights; // C x D
    Vec bias;       // C
    ScoreKind kind = ScoreKind::probabilistic;
    bool multi_label = false;

    std::size_t num_classes() const { return weights.rows; }
    std::size_t dim() const { return weights.cols; }

    bool operator==(const LinearModel&) const = default;
};

struct TrainConfig {
    double l2_penalty = 1e-4;
    double learning_rate = 0.05;
    int max_epochs = 200;
    int early_stop_patience = 10;
    std::uint64_t seed = 0;
    bool multi_label = false;
};

// L2-regularized logistic regression (softmax cross-entropy, or per-class
// sigmoid with binary cross-entropy in multi-label mode), full-batch with
// ADAM steps from zero-initialized parameters. Deterministic for a given
// config; the returned parameters are the ones with the lowest seen loss.
LinearModel train_linear(const LabeledFeatureSet& data, const TrainConfig& config);

Vec predict_scores(const LinearModel& model, const Vec& feature);

// argmax; ties resolve to the smallest index.
std::size_t decide(const Vec& confidences);

// Loss and analytic gradient at (weights, bias); exposed so the gradient can
// be checked against finite differences.
struct LinearLossGrad {
    double loss = 0.0;
    Matrix grad_weights;
    Vec grad_bias;
};
LinearLossGrad linear_loss_gradient(const Matrix& weights, const Vec& bias,
                                    const LabeledFeatureSet& data, const TrainConfig& config);

} // namespace galev
