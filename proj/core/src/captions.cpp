#include "galev/captions.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "galev/errors.hpp"

namespace galev {

Vocabulary build_vocabulary(const CaptionStore& captions,
                            const std::vector<std::string>& train_ids, std::size_t max_size,
                            const std::set<std::string>* stopwords) {
    if (max_size < 1) throw ValidationError("build_vocabulary: max_size must be >= 1");

    std::map<std::string, std::size_t> frequency; // ordered: lexicographic tie-break for free
    for (const auto& id : train_ids) {
        for (const auto& token : captions.tokens(id)) {
            if (stopwords && stopwords->count(token)) continue;
            ++frequency[token];
        }
    }
    if (frequency.empty()) {
        throw ValidationError("build_vocabulary: no training captions (empty vocabulary)");
    }

    std::vector<std::pair<std::string, std::size_t>> ranked(frequency.begin(), frequency.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (ranked.size() > max_size) ranked.resize(max_size);

    Vocabulary vocab;
    vocab.stopwords_applied = stopwords != nullptr;
    vocab.words.reserve(ranked.size());
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        vocab.words.push_back(ranked[i].first);
        vocab.index.emplace(ranked[i].first, i);
    }
    return vocab;
}

SparseCaptionVector encode_one_hot(const std::vector<std::string>& caption,
                                   const Vocabulary& vocab) {
    std::set<std::size_t> active;
    for (const auto& token : caption) {
        auto it = vocab.index.find(token);
        if (it != vocab.index.end()) active.insert(it->second);
    }
    SparseCaptionVector out;
    out.active_indices.assign(active.begin(), active.end());
    return out;
}

LinearModel train_text_classifier(const std::vector<SparseCaptionVector>& encoded,
                                  const std::vector<std::set<int>>& labels, int num_classes,
                                  std::size_t vocab_size, const TrainConfig& config) {
    if (encoded.size() != labels.size()) {
        throw ValidationError("train_text_classifier: encoded/labels length mismatch");
    }
    LabeledFeatureSet data;
    data.num_classes = num_classes;
    data.features.reserve(encoded.size());
    for (const auto& sparse : encoded) {
        Vec dense(vocab_size, 0.0);
        for (std::size_t idx : sparse.active_indices) {
            if (idx >= vocab_size) {
                throw ValidationError("train_text_classifier: active index out of range");
            }
            dense[idx] = 1.0;
        }
        data.features.push_back(std::move(dense));
    }
    data.labels = labels;
    data.source_album.assign(encoded.size(), 0);
    return train_linear(data, config);
}

Vec fuse(const Vec& p_emb, const Vec& p_txt, double w) {
    if (p_emb.size() != p_txt.size()) {
        throw ValidationError("fuse: score length mismatch");
    }
    if (w < 0.0 || w > 1.0) throw ValidationError("fuse: weight outside [0, 1]");
    Vec out(p_emb.size());
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = w * p_emb[c] + (1.0 - w) * p_txt[c];
    return out;
}

double fused_accuracy(const std::vector<Vec>& p_emb, const std::vector<Vec>& p_txt,
                      const std::vector<std::set<int>>& labels, double w) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < p_emb.size(); ++i) {
        const int predicted = static_cast<int>(decide(fuse(p_emb[i], p_txt[i], w)));
        if (labels[i].count(predicted)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(p_emb.size());
}

double select_fusion_weight(const std::vector<Vec>& p_emb, const std::vector<Vec>& p_txt,
                            const std::vector<std::set<int>>& labels, double grid_step) {
    if (p_emb.empty() || p_emb.size() != p_txt.size() || p_emb.size() != labels.size()) {
        throw ValidationError("select_fusion_weight: empty or mismatched validation lists");
    }
    if (grid_step <= 0.0) throw ValidationError("select_fusion_weight: grid_step must be > 0");

    double best_w = 0.0;
    double best_accuracy = -1.0;
    const std::size_t steps = static_cast<std::size_t>(std::floor(1.0 / grid_step));
    for (std::size_t k = 0; k <= steps + 1; ++k) {
        const double w = std::min(1.0, static_cast<double>(k) * grid_step);
        const double acc = fused_accuracy(p_emb, p_txt, labels, w);
        if (acc >= best_accuracy) { // >= prefers the larger w on ties
            best_accuracy = acc;
            best_w = w;
        }
        if (w == 1.0) break;
    }
    return best_w;
}

} // namespace galev
