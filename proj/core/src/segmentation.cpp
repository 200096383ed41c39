#include "galev/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "galev/errors.hpp"

namespace galev {

std::vector<std::pair<std::size_t, std::size_t>> Boundaries::spans() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(ends.size());
    std::size_t begin = 0;
    for (std::size_t end : ends) {
        out.emplace_back(begin, end);
        begin = end;
    }
    return out;
}

double pairwise_distance(const Vec& a, const Vec& b, const DistanceMetric& metric) {
    if (a.size() != b.size()) {
        throw ValidationError("pairwise_distance: length mismatch (" + std::to_string(a.size()) +
                              " vs " + std::to_string(b.size()) + ")");
    }
    const Vec& u = metric.normalize_inputs ? l2_normalize(a) : a;
    const Vec& v = metric.normalize_inputs ? l2_normalize(b) : b;

    switch (metric.kind) {
    case MetricKind::euclidean: {
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double d = u[i] - v[i];
            s += d * d;
        }
        return std::sqrt(s);
    }
    case MetricKind::chi_squared: {
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (u[i] < 0.0 || v[i] < 0.0) {
                throw std::domain_error("chi-squared distance requires non-negative components");
            }
            const double sum = u[i] + v[i];
            if (sum == 0.0) continue;
            const double d = u[i] - v[i];
            s += d * d / sum;
        }
        return s;
    }
    }
    throw ValidationError("pairwise_distance: unknown metric");
}

double geo_distance_km(const GeoPoint& a, const GeoPoint& b) {
    constexpr double kEarthRadiusKm = 6371.0088;
    constexpr double kDegToRad = 3.141592653589793238462643383279502884 / 180.0;
    const double lat1 = a.lat * kDegToRad;
    const double lat2 = b.lat * kDegToRad;
    const double dlat = (b.lat - a.lat) * kDegToRad;
    const double dlon = (b.lon - a.lon) * kDegToRad;
    const double s1 = std::sin(dlat / 2.0);
    const double s2 = std::sin(dlon / 2.0);
    const double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

std::vector<double> consecutive_distances(const std::vector<Vec>& sequence,
                                          const std::vector<std::optional<GeoPoint>>& locations,
                                          const DistanceMetric& metric, double location_weight) {
    if (sequence.empty()) throw ValidationError("consecutive_distances: empty sequence");
    if (!locations.empty() && locations.size() != sequence.size()) {
        throw ValidationError("consecutive_distances: locations not parallel to sequence");
    }
    std::vector<double> out;
    out.reserve(sequence.size() - 1);
    for (std::size_t t = 1; t < sequence.size(); ++t) {
        double d = pairwise_distance(sequence[t], sequence[t - 1], metric);
        if (location_weight > 0.0 && !locations.empty() && locations[t] && locations[t - 1]) {
            d += location_weight * geo_distance_km(*locations[t], *locations[t - 1]);
        }
        out.push_back(d);
    }
    return out;
}

Boundaries boundaries_from_distances(const std::vector<double>& distances, double threshold) {
    Boundaries b;
    const std::size_t total = distances.size() + 1;
    for (std::size_t t = 2; t <= total; ++t) {
        if (distances[t - 2] > threshold) b.ends.push_back(t - 1);
    }
    b.ends.push_back(total);
    return b;
}

Boundaries detect_boundaries(const std::vector<Vec>& sequence,
                             const std::vector<std::optional<GeoPoint>>& locations,
                             const SegmentationConfig& config) {
    return boundaries_from_distances(
        consecutive_distances(sequence, locations, config.metric, config.location_weight),
        config.threshold);
}

Boundaries detect_boundaries(const std::vector<Vec>& sequence, const SegmentationConfig& config) {
    return detect_boundaries(sequence, {}, config);
}

std::vector<DendrogramMerge> average_linkage_dendrogram(const std::vector<Vec>& vectors,
                                                        const DistanceMetric& metric) {
    const std::size_t n = vectors.size();
    if (n == 0) throw ValidationError("average_linkage_dendrogram: empty input");

    // Lance-Williams update for average linkage on a dense distance matrix.
    // active[i] maps a live matrix row to its current cluster id.
    std::vector<double> dist(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = pairwise_distance(vectors[i], vectors[j], metric);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }

    std::vector<std::size_t> id(n);
    std::iota(id.begin(), id.end(), 0);
    std::vector<std::size_t> size(n, 1);
    std::vector<bool> alive(n, true);

    std::vector<DendrogramMerge> merges;
    merges.reserve(n - 1);
    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t bi = n, bj = n;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (!alive[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!alive[j]) continue;
                if (dist[i * n + j] < best) {
                    best = dist[i * n + j];
                    bi = i;
                    bj = j;
                }
            }
        }
        merges.push_back({id[bi], id[bj], best});

        // Fold cluster bj into row bi; weighted mean keeps averages exact.
        const double wi = static_cast<double>(size[bi]);
        const double wj = static_cast<double>(size[bj]);
        for (std::size_t k = 0; k < n; ++k) {
            if (!alive[k] || k == bi || k == bj) continue;
            const double d = (wi * dist[bi * n + k] + wj * dist[bj * n + k]) / (wi + wj);
            dist[bi * n + k] = d;
            dist[k * n + bi] = d;
        }
        alive[bj] = false;
        size[bi] += size[bj];
        id[bi] = n + step;
    }
    return merges;
}

std::vector<std::size_t> cut_dendrogram(const std::vector<DendrogramMerge>& merges,
                                        std::size_t n, double threshold) {
    // Union-find over merges at or below the threshold.
    std::vector<std::size_t> parent(n + merges.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (std::size_t i = 0; i < merges.size(); ++i) {
        if (merges[i].height <= threshold) {
            const std::size_t node = n + i;
            parent[find(merges[i].a)] = node;
            parent[find(merges[i].b)] = node;
        }
    }

    std::vector<std::size_t> labels(n);
    std::vector<std::size_t> order(n + merges.size(), SIZE_MAX);
    std::size_t next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t root = find(i);
        if (order[root] == SIZE_MAX) order[root] = next++;
        labels[i] = order[root];
    }
    return labels;
}

std::vector<std::size_t> agglomerative_baseline(const std::vector<Vec>& vectors,
                                                const DistanceMetric& metric, double threshold) {
    if (vectors.empty()) throw ValidationError("agglomerative_baseline: empty input");
    if (vectors.size() == 1) return {0};
    return cut_dendrogram(average_linkage_dendrogram(vectors, metric), vectors.size(), threshold);
}

} // namespace galev
