#include "galev/calibration.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "galev/errors.hpp"
#include "galev/rng.hpp"

namespace galev {

PermutedGallery permute_and_unfold(const GalleryManifest& manifest, std::uint64_t seed) {
    if (manifest.albums.empty()) throw ValidationError("permute_and_unfold: empty manifest");

    std::vector<std::size_t> order(manifest.albums.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);

    PermutedGallery out;
    const std::size_t total = manifest.total_photos();
    out.photo_ids.reserve(total);
    out.labels.reserve(total);
    out.locations.reserve(total);
    out.album_of.reserve(total);
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const auto& album = manifest.albums[order[pos]];
        for (const auto& photo : album.photos) {
            out.photo_ids.push_back(photo.photo_id);
            out.labels.push_back(album.labels);
            out.locations.push_back(photo.location);
            out.album_of.push_back(pos);
        }
    }
    return out;
}

std::vector<double> candidate_thresholds(const std::vector<double>& consecutive_distances) {
    if (consecutive_distances.empty()) return {0.0};

    std::vector<double> distinct = consecutive_distances;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    std::vector<double> candidates;
    candidates.reserve(distinct.size() + 1);
    // A threshold below every observed distance splits everywhere. Thresholds
    // are non-negative, so when the minimum is 0 that region does not exist
    // and the first midpoint already covers [0, next).
    if (distinct.front() > 0.0) candidates.push_back(distinct.front() / 2.0);
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
        candidates.push_back(0.5 * (distinct[i] + distinct[i + 1]));
    }
    candidates.push_back(distinct.back() + 1.0);
    return candidates;
}

namespace {

struct PreparedGallery {
    std::vector<Vec> features;          // embeddings, gallery order
    std::vector<std::set<int>> labels;  // ground truth per photo
    std::vector<double> distances;      // consecutive, in the configured space
};

PreparedGallery prepare(const GalleryManifest& manifest, const FeatureStore& store,
                        const LinearModel& classifier, const CalibrationConfig& config,
                        std::uint64_t permutation_seed) {
    const PermutedGallery gallery = permute_and_unfold(manifest, permutation_seed);

    PreparedGallery out;
    out.labels = gallery.labels;
    out.features.reserve(gallery.photo_ids.size());
    for (const auto& id : gallery.photo_ids) out.features.push_back(store.at(id));

    if (config.space == SegmentationSpace::scores) {
        std::vector<Vec> scores;
        scores.reserve(out.features.size());
        for (const Vec& f : out.features) scores.push_back(predict_scores(classifier, f));
        out.distances = consecutive_distances(scores, gallery.locations, config.metric,
                                              config.location_weight);
    } else {
        out.distances = consecutive_distances(out.features, gallery.locations, config.metric,
                                              config.location_weight);
    }
    return out;
}

// Accuracy of segment-then-classify at one threshold. Album predictions are
// memoized per span because neighboring thresholds share most spans.
double accuracy_at(const PreparedGallery& gallery, const AttentionModel& attention,
                   double threshold,
                   std::map<std::pair<std::size_t, std::size_t>, std::size_t>& span_cache) {
    const Boundaries bounds = boundaries_from_distances(gallery.distances, threshold);
    std::size_t correct = 0;
    for (const auto& [begin, end] : bounds.spans()) {
        auto it = span_cache.find({begin, end});
        if (it == span_cache.end()) {
            const std::vector<Vec> span(gallery.features.begin() + begin,
                                        gallery.features.begin() + end);
            it = span_cache.emplace(std::pair{begin, end}, decide(forward(attention, span))).first;
        }
        const int predicted = static_cast<int>(it->second);
        for (std::size_t t = begin; t < end; ++t) {
            if (gallery.labels[t].count(predicted)) ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(gallery.features.size());
}

} // namespace

CalibrationResult calibrate(const GalleryManifest& manifest, const FeatureStore& store,
                            const LinearModel& classifier, const AttentionModel& attention,
                            const CalibrationConfig& config, std::uint64_t seed) {
    if (config.repeats < 1) throw ValidationError("calibrate: repeats must be >= 1");
    if (store.dim != classifier.dim() || store.dim != attention.dim()) {
        throw ValidationError("calibrate: model dimensions inconsistent with feature store");
    }

    std::vector<PreparedGallery> galleries;
    galleries.reserve(config.repeats);
    std::vector<double> pooled;
    for (std::size_t r = 0; r < config.repeats; ++r) {
        galleries.push_back(
            prepare(manifest, store, classifier, config, derive_seed(seed, r)));
        pooled.insert(pooled.end(), galleries.back().distances.begin(),
                      galleries.back().distances.end());
    }
    const std::vector<double> candidates = candidate_thresholds(pooled);

    std::vector<std::map<std::pair<std::size_t, std::size_t>, std::size_t>> caches(
        galleries.size());
    double best_accuracy = -1.0;
    double best_threshold = 0.0;
    for (const double rho : candidates) {
        double mean = 0.0;
        for (std::size_t g = 0; g < galleries.size(); ++g) {
            mean += accuracy_at(galleries[g], attention, rho, caches[g]);
        }
        mean /= static_cast<double>(galleries.size());
        if (mean > best_accuracy) { // candidates ascend, so ties keep the smallest
            best_accuracy = mean;
            best_threshold = rho;
        }
    }

    CalibrationResult result;
    result.threshold = best_threshold;
    result.accuracy = best_accuracy;
    result.permutation_seed = seed;
    result.candidates_evaluated = candidates.size();
    return result;
}

} // namespace galev
