#include "galev/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "galev/errors.hpp"

namespace galev {

namespace {

std::vector<Vec> normalized_copy(const std::vector<Vec>& features) {
    std::vector<Vec> out;
    out.reserve(features.size());
    for (const Vec& f : features) out.push_back(l2_normalize(f));
    return out;
}

double binary_cross_entropy(double z, double y) {
    return std::max(z, 0.0) - y * z + std::log1p(std::exp(-std::abs(z)));
}

double log_sum_exp(const Vec& z) {
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - m);
    return m + std::log(s);
}

void check_item_shapes(const AttentionModel& model, const std::vector<Vec>& features) {
    if (features.empty()) throw ValidationError("attention: empty feature set");
    for (const Vec& f : features) {
        if (f.size() != model.dim()) {
            throw ValidationError("attention: feature dimension " + std::to_string(f.size()) +
                                  ", model expects " + std::to_string(model.dim()));
        }
    }
}

// Loss of one already-normalized item plus its gradient contribution,
// scaled by `scale` and accumulated into `acc`.
double accumulate_item_gradient(const AttentionModel& model, const std::vector<Vec>& item,
                                const std::set<int>& target, double scale,
                                AttentionLossGrad& acc) {
    const std::size_t set_size = item.size();
    const std::size_t dim = model.dim();
    const std::size_t num_classes = model.num_classes();

    const Vec weights = attention_weights(model.q, item);
    const Vec descriptor = aggregate(item, weights);
    const Vec z = affine(model.dense_weights, descriptor, model.dense_bias);

    double loss = 0.0;
    Vec dz(num_classes);
    if (model.multi_label) {
        for (std::size_t c = 0; c < num_classes; ++c) {
            const double y = target.count(static_cast<int>(c)) ? 1.0 : 0.0;
            loss += binary_cross_entropy(z[c], y);
            dz[c] = sigmoid(z[c]) - y;
        }
    } else {
        if (target.size() != 1) {
            throw ValidationError("attention: single-label loss needs exactly one target label");
        }
        const int y = *target.begin();
        if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
            throw ValidationError("attention: target label out of range");
        }
        loss = log_sum_exp(z) - z[static_cast<std::size_t>(y)];
        const Vec a = softmax(z);
        for (std::size_t c = 0; c < num_classes; ++c) {
            dz[c] = a[c] - (static_cast<int>(c) == y ? 1.0 : 0.0);
        }
    }

    // Dense layer.
    for (std::size_t c = 0; c < num_classes; ++c) {
        acc.grad_dense_bias[c] += scale * dz[c];
        double* row = &acc.grad_dense_weights.data[c * dim];
        for (std::size_t d = 0; d < dim; ++d) row[d] += scale * dz[c] * descriptor[d];
    }

    // Through the descriptor into the softmax weights and q.
    Vec g_descriptor(dim, 0.0);
    for (std::size_t c = 0; c < num_classes; ++c) {
        const double* row = &model.dense_weights.data[c * dim];
        for (std::size_t d = 0; d < dim; ++d) g_descriptor[d] += dz[c] * row[d];
    }
    Vec g_weights(set_size);
    double weighted_sum = 0.0;
    for (std::size_t t = 0; t < set_size; ++t) {
        g_weights[t] = dot(g_descriptor, item[t]);
        weighted_sum += weights[t] * g_weights[t];
    }
    for (std::size_t t = 0; t < set_size; ++t) {
        const double ds = weights[t] * (g_weights[t] - weighted_sum);
        for (std::size_t d = 0; d < dim; ++d) acc.grad_q[d] += scale * ds * item[t][d];
    }
    return loss;
}

} // namespace

Vec attention_weights(const Vec& q, const std::vector<Vec>& features) {
    if (features.empty()) throw ValidationError("attention_weights: empty feature set");
    Vec scores(features.size());
    for (std::size_t t = 0; t < features.size(); ++t) scores[t] = dot(q, features[t]);
    return softmax(scores);
}

Vec aggregate(const std::vector<Vec>& features, const Vec& weights) {
    if (features.size() != weights.size()) {
        throw ValidationError("aggregate: features/weights length mismatch");
    }
    if (features.empty()) throw ValidationError("aggregate: empty feature set");
    Vec out(features.front().size(), 0.0);
    for (std::size_t t = 0; t < features.size(); ++t) {
        if (features[t].size() != out.size()) throw ValidationError("aggregate: ragged features");
        for (std::size_t d = 0; d < out.size(); ++d) out[d] += weights[t] * features[t][d];
    }
    return out;
}

Vec forward(const AttentionModel& model, const std::vector<Vec>& features) {
    check_item_shapes(model, features);
    const std::vector<Vec> normed = normalized_copy(features);
    const Vec weights = attention_weights(model.q, normed);
    const Vec descriptor = aggregate(normed, weights);
    const Vec z = affine(model.dense_weights, descriptor, model.dense_bias);
    return model.multi_label ? sigmoid_vec(z) : softmax(z);
}

std::vector<std::size_t> sample_subset_indices(std::size_t album_size, std::size_t subset_size,
                                               Rng& rng) {
    if (album_size == 0) throw ValidationError("sample_subset_indices: empty album");
    if (album_size >= subset_size) return rng.pick_distinct(album_size, subset_size);
    std::vector<std::size_t> out(subset_size);
    for (std::size_t i = 0; i < subset_size; ++i) out[i] = rng.below(album_size);
    return out;
}

AttentionLossGrad attention_loss_gradient(const AttentionModel& model,
                                          const std::vector<std::vector<Vec>>& items,
                                          const std::vector<std::set<int>>& targets) {
    if (items.empty() || items.size() != targets.size()) {
        throw ValidationError("attention_loss_gradient: empty or mismatched batch");
    }
    AttentionLossGrad acc;
    acc.grad_q = Vec(model.dim(), 0.0);
    acc.grad_dense_weights = Matrix(model.num_classes(), model.dim());
    acc.grad_dense_bias = Vec(model.num_classes(), 0.0);

    const double scale = 1.0 / static_cast<double>(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        check_item_shapes(model, items[i]);
        acc.loss += scale * accumulate_item_gradient(model, normalized_copy(items[i]),
                                                     targets[i], scale, acc);
    }
    return acc;
}

AttentionModel train_attention(const GalleryManifest& manifest, const FeatureStore& store,
                               const AttentionTrainConfig& config) {
    if (manifest.albums.empty()) throw ValidationError("train_attention: empty manifest");
    if (config.subset_size < 1) throw ValidationError("train_attention: subset_size < 1");
    if (config.max_epochs < 1) throw ValidationError("train_attention: max_epochs < 1");

    const std::size_t dim = store.dim;
    const std::size_t num_classes = static_cast<std::size_t>(manifest.num_classes);

    AttentionModel model;
    model.multi_label = manifest.is_multi_label();
    // q starts at zero, i.e. exactly at average pooling; the dense layer gets
    // small seeded values.
    model.q = Vec(dim, 0.0);
    model.dense_weights = Matrix(num_classes, dim);
    model.dense_bias = Vec(num_classes, 0.0);

    Rng rng(derive_seed(config.seed, 0));
    for (double& w : model.dense_weights.data) w = rng.uniform(-0.05, 0.05);

    // Fixed-shape training items.
    std::vector<std::vector<Vec>> items;
    std::vector<std::set<int>> targets;
    Rng sampler(derive_seed(config.seed, 1));
    for (const auto& album : manifest.albums) {
        std::vector<Vec> album_features;
        album_features.reserve(album.photos.size());
        for (const auto& photo : album.photos) album_features.push_back(store.at(photo.photo_id));
        for (std::size_t s = 0; s < config.subsets_per_album; ++s) {
            const auto idx =
                sample_subset_indices(album_features.size(), config.subset_size, sampler);
            std::vector<Vec> item;
            item.reserve(idx.size());
            for (std::size_t i : idx) item.push_back(album_features[i]);
            items.push_back(std::move(item));
            targets.push_back(album.labels);
        }
    }

    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double adam_eps = 1e-8;
    Vec mq(dim, 0.0), vq(dim, 0.0);
    Matrix mw(num_classes, dim), vw(num_classes, dim);
    Vec mb(num_classes, 0.0), vb(num_classes, 0.0);

    AttentionModel best = model;
    double best_loss = std::numeric_limits<double>::infinity();
    int stale_epochs = 0;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        const AttentionLossGrad lg = attention_loss_gradient(model, items, targets);
        if (lg.loss < best_loss) {
            best_loss = lg.loss;
            best = model;
            stale_epochs = 0;
        } else if (++stale_epochs > config.early_stop_patience) {
            break;
        }

        const double bc1 = 1.0 - std::pow(beta1, epoch);
        const double bc2 = 1.0 - std::pow(beta2, epoch);
        auto adam_step = [&](double g, double& m, double& v, double& param) {
            m = beta1 * m + (1.0 - beta1) * g;
            v = beta2 * v + (1.0 - beta2) * g * g;
            param -= config.learning_rate * (m / bc1) / (std::sqrt(v / bc2) + adam_eps);
        };
        for (std::size_t d = 0; d < dim; ++d) adam_step(lg.grad_q[d], mq[d], vq[d], model.q[d]);
        for (std::size_t k = 0; k < model.dense_weights.data.size(); ++k) {
            adam_step(lg.grad_dense_weights.data[k], mw.data[k], vw.data[k],
                      model.dense_weights.data[k]);
        }
        for (std::size_t c = 0; c < num_classes; ++c) {
            adam_step(lg.grad_dense_bias[c], mb[c], vb[c], model.dense_bias[c]);
        }
    }
    return best;
}

double gradient_check(const AttentionModel& model, const std::vector<Vec>& features,
                      const std::set<int>& target, double step) {
    if (step <= 0.0) throw ValidationError("gradient_check: step must be positive");

    const std::vector<std::vector<Vec>> items{features};
    const std::vector<std::set<int>> targets{target};
    const AttentionLossGrad analytic = attention_loss_gradient(model, items, targets);

    AttentionModel probe = model;
    auto loss_at = [&]() { return attention_loss_gradient(probe, items, targets).loss; };
    double worst = 0.0;
    auto central = [&](double& param, double analytic_g) {
        const double saved = param;
        param = saved + step;
        const double up = loss_at();
        param = saved - step;
        const double down = loss_at();
        param = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double scale = std::max({1.0, std::abs(analytic_g), std::abs(numeric)});
        worst = std::max(worst, std::abs(analytic_g - numeric) / scale);
    };

    for (std::size_t d = 0; d < probe.q.size(); ++d) central(probe.q[d], analytic.grad_q[d]);
    for (std::size_t k = 0; k < probe.dense_weights.data.size(); ++k) {
        central(probe.dense_weights.data[k], analytic.grad_dense_weights.data[k]);
    }
    for (std::size_t c = 0; c < probe.dense_bias.size(); ++c) {
        central(probe.dense_bias[c], analytic.grad_dense_bias[c]);
    }
    return worst;
}

} // namespace galev
