#pragma once

#include <set>
#include <string>
#include <unordered_map>

#include "galev/gallery.hpp"
#include "galev/linear_model.hpp"

namespace galev {

// Reduced vocabulary: the most frequent training tokens, frequency ties
// resolved lexicographically.
struct Vocabulary {
    std::vector<std::string> words; // rank order
    std::unordered_map<std::string, std::size_t> index;
    bool stopwords_applied = false;

    std::size_t size() const { return words.size(); }
};

// Binary presence vector over the vocabulary, stored sparse.
struct SparseCaptionVector {
    std::vector<std::size_t> active_indices; // sorted, unique
};

struct FusionConfig {
    double weight = 1.0; // w: share of the embedding branch
    double grid_step = 0.01;
};

// Frequencies are counted over training photos only; stopwords are removed
// before ranking.
Vocabulary build_vocabulary(const CaptionStore& captions,
                            const std::vector<std::string>& train_ids, std::size_t max_size,
                            const std::set<std::string>* stopwords = nullptr);

// Index v is active iff word v occurs at least once; out-of-vocabulary
// tokens are ignored.
SparseCaptionVector encode_one_hot(const std::vector<std::string>& caption,
                                   const Vocabulary& vocab);

// Logistic-regression training over expanded binary caption vectors.
LinearModel train_text_classifier(const std::vector<SparseCaptionVector>& encoded,
                                  const std::vector<std::set<int>>& labels, int num_classes,
                                  std::size_t vocab_size, const TrainConfig& config);

// w * p_emb + (1 - w) * p_txt, componentwise.
Vec fuse(const Vec& p_emb, const Vec& p_txt, double w);

// Fraction of items whose fused argmax decision hits any true label.
double fused_accuracy(const std::vector<Vec>& p_emb, const std::vector<Vec>& p_txt,
                      const std::vector<std::set<int>>& labels, double w);

// Sweeps w over {0, step, ..., 1} and returns the accuracy maximizer on the
// validation lists; ties resolve toward the larger w (embedding branch).
double select_fusion_weight(const std::vector<Vec>& p_emb, const std::vector<Vec>& p_txt,
                            const std::vector<std::set<int>>& labels, double grid_step);

} // namespace galev
