#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "galev/gallery.hpp"
#include "galev/vector_math.hpp"

namespace galev {

enum class MetricKind {
    euclidean,
    chi_squared, // sum (a-b)^2/(a+b), zero-sum terms skipped; inputs must be >= 0
};

struct DistanceMetric {
    MetricKind kind = MetricKind::euclidean;
    bool normalize_inputs = false; // l2-normalize both arguments first
};

enum class SegmentationSpace {
    embeddings, // match feature vectors x_t
    scores,     // match classifier confidences p_t
};

struct SegmentationConfig {
    DistanceMetric metric;
    SegmentationSpace space = SegmentationSpace::scores;
    double threshold = 0.0;       // a boundary opens where distance exceeds this
    double location_weight = 0.0; // 0 disables the geographic term
};

// Album ends as 1-based indices, strictly increasing, last one == T.
struct Boundaries {
    std::vector<std::size_t> ends;

    std::size_t album_count() const { return ends.size(); }
    // 0-based [begin, end) album spans.
    std::vector<std::pair<std::size_t, std::size_t>> spans() const;

    bool operator==(const Boundaries&) const = default;
};

double pairwise_distance(const Vec& a, const Vec& b, const DistanceMetric& metric);

// Great-circle (haversine) distance in kilometers.
double geo_distance_km(const GeoPoint& a, const GeoPoint& b);

// distances[t-2] = metric distance between positions t and t-1 (1-based t),
// plus location_weight * geo km when both photos carry coordinates.
std::vector<double> consecutive_distances(const std::vector<Vec>& sequence,
                                          const std::vector<std::optional<GeoPoint>>& locations,
                                          const DistanceMetric& metric, double location_weight);

// Thresholding of precomputed consecutive distances.
Boundaries boundaries_from_distances(const std::vector<double>& distances, double threshold);

// One-pass sequential segmentation: a new album opens before position t
// exactly when the (possibly location-augmented) distance to position t-1
// exceeds config.threshold.
Boundaries detect_boundaries(const std::vector<Vec>& sequence,
                             const std::vector<std::optional<GeoPoint>>& locations,
                             const SegmentationConfig& config);
Boundaries detect_boundaries(const std::vector<Vec>& sequence, const SegmentationConfig& config);

// Average-linkage hierarchy, recorded bottom-up. Leaves are 0..n-1; the i-th
// merge creates cluster n+i from clusters a and b at the given height.
struct DendrogramMerge {
    std::size_t a = 0;
    std::size_t b = 0;
    double height = 0.0;
};
std::vector<DendrogramMerge> average_linkage_dendrogram(const std::vector<Vec>& vectors,
                                                        const DistanceMetric& metric);

// Applies all merges with height <= threshold; ids are assigned in order of
// first appearance in the sequence.
std::vector<std::size_t> cut_dendrogram(const std::vector<DendrogramMerge>& merges,
                                        std::size_t n, double threshold);

// Hierarchical-clustering baseline; clusters need not be contiguous.
std::vector<std::size_t> agglomerative_baseline(const std::vector<Vec>& vectors,
                                                const DistanceMetric& metric, double threshold);

} // namespace galev
