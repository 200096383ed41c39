#pragma once

#include <cstdint>
#include <set>

#include "galev/gallery.hpp"
#include "galev/rng.hpp"
#include "galev/vector_math.hpp"

namespace galev {

// Attention pooling over a photo set: softmax(q . x_t) weights, weighted-sum
// descriptor, then one dense layer. q = 0 reduces exactly to average pooling.
struct AttentionModel {
    Vec q;               // D
    Matrix dense_weights; // C x D
    Vec dense_bias;       // C
    bool multi_label = false;

    std::size_t num_classes() const { return dense_weights.rows; }
    std::size_t dim() const { return dense_weights.cols; }

    bool operator==(const AttentionModel&) const = default;
};

struct AttentionTrainConfig {
    std::size_t subset_size = 10; // fixed S per training item
    double learning_rate = 0.001;
    int max_epochs = 10;
    int early_stop_patience = 2;
    std::uint64_t seed = 0;
    std::size_t subsets_per_album = 1;
};

// softmax over q . x_t; strictly positive, sums to 1. Callers pass features
// already on the unit sphere (forward() takes care of that).
Vec attention_weights(const Vec& q, const std::vector<Vec>& features);

// Weighted sum of features; parallel lists required.
Vec aggregate(const std::vector<Vec>& features, const Vec& weights);

// Full pass: normalize -> attention weights -> aggregate -> dense -> softmax
// (single-label) or per-class sigmoid (multi-label). Accepts any set size >= 1.
Vec forward(const AttentionModel& model, const std::vector<Vec>& features);

// End-to-end training on fixed-size subsets drawn per album: albums with at
// least subset_size photos contribute distinct draws, smaller albums are
// sampled with replacement. Full-batch ADAM; deterministic for a given seed.
AttentionModel train_attention(const GalleryManifest& manifest, const FeatureStore& store,
                               const AttentionTrainConfig& config);

// Indices into an album for one fixed-size training item.
std::vector<std::size_t> sample_subset_indices(std::size_t album_size, std::size_t subset_size,
                                               Rng& rng);

// Batch loss and analytic gradients for (q, dense_weights, dense_bias).
struct AttentionLossGrad {
    double loss = 0.0;
    Vec grad_q;
    Matrix grad_dense_weights;
    Vec grad_dense_bias;
};
AttentionLossGrad attention_loss_gradient(const AttentionModel& model,
                                          const std::vector<std::vector<Vec>>& items,
                                          const std::vector<std::set<int>>& targets);

// Max relative error between the analytic gradient and central finite
// differences of the single-item loss, over every parameter.
double gradient_check(const AttentionModel& model, const std::vector<Vec>& features,
                      const std::set<int>& target, double step);

} // namespace galev
