#pragma once

#include <cstdint>
#include <string>

#include "galev/attention.hpp"
#include "galev/gallery.hpp"
#include "galev/linear_model.hpp"
#include "galev/segmentation.hpp"

namespace galev {

struct EvalReport {
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0; // population standard deviation
    int repeats = 0;
    std::vector<double> per_repeat;
    std::string config_digest;

    bool operator==(const EvalReport&) const = default;
};

// Segment-then-classify over one ordered gallery: per-photo scores, boundary
// detection in the configured space, attention classification per detected
// album, label broadcast to the album's photos.
std::vector<std::size_t> recognize_gallery(const std::vector<Vec>& photos,
                                           const LinearModel& classifier,
                                           const AttentionModel& attention,
                                           const SegmentationConfig& config,
                                           const std::vector<std::optional<GeoPoint>>& locations = {});

// Fraction of photos whose prediction appears in their ground-truth set.
double per_image_accuracy(const std::vector<std::size_t>& predicted,
                          const std::vector<std::set<int>>& truth);

// Repeats r = 0..repeats-1 each shuffle album order and in-album photo order
// under a seed derived from (seed, r), then run recognize_gallery.
EvalReport run_shuffled_eval(const GalleryManifest& manifest, const FeatureStore& store,
                             const LinearModel& classifier, const AttentionModel& attention,
                             const SegmentationConfig& config, int repeats, std::uint64_t seed);

// "80.48 ± 1.01 (repeats=10)": percent mean and std, two decimals.
std::string format_report_line(const EvalReport& report);

} // namespace galev
