#pragma once

#include <cstdint>
#include <string>

#include "galev/attention.hpp"
#include "galev/gallery.hpp"
#include "galev/linear_model.hpp"
#include "galev/segmentation.hpp"

namespace galev {

struct CalibrationResult {
    double threshold = 0.0;
    double accuracy = 0.0; // per-image, any-match, on the permuted training gallery
    std::uint64_t permutation_seed = 0;
    std::size_t candidates_evaluated = 0;

    bool operator==(const CalibrationResult&) const = default;
};

// Training gallery with album order shuffled, in-album order kept.
struct PermutedGallery {
    std::vector<std::string> photo_ids;
    std::vector<std::set<int>> labels;
    std::vector<std::optional<GeoPoint>> locations;
    std::vector<std::size_t> album_of; // index into the permuted album order
};

PermutedGallery permute_and_unfold(const GalleryManifest& manifest, std::uint64_t seed);

// Finite threshold grid that is lossless for the piecewise-constant accuracy
// curve: midpoints between distinct sorted distances, half the minimum (when
// positive) and maximum + 1. Empty input yields {0}.
std::vector<double> candidate_thresholds(const std::vector<double>& consecutive_distances);

// SegmentationConfig without the threshold (that is what gets learned), plus
// the number of permutations to average over.
struct CalibrationConfig {
    DistanceMetric metric;
    SegmentationSpace space = SegmentationSpace::scores;
    double location_weight = 0.0;
    std::size_t repeats = 1; // permutations averaged per candidate
};

// Sweeps candidate thresholds over permuted training galleries and returns
// the one maximizing per-image accuracy of the segment-then-classify
// pipeline. Ties resolve to the smallest threshold. Consecutive distances
// are computed once per permutation and reused across candidates.
CalibrationResult calibrate(const GalleryManifest& manifest, const FeatureStore& store,
                            const LinearModel& classifier, const AttentionModel& attention,
                            const CalibrationConfig& config, std::uint64_t seed);

} // namespace galev
