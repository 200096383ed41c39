#include "galev/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "galev/errors.hpp"
#include "galev/rng.hpp"

namespace galev {

namespace {

// FNV-1a over a canonical description of the run configuration.
std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string describe(const SegmentationConfig& config, int repeats, std::uint64_t seed,
                     std::size_t num_classes, std::size_t dim) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "metric=%d norm=%d space=%d rho=%.17g lambda=%.17g "
                                   "repeats=%d seed=%llu C=%zu D=%zu",
                  static_cast<int>(config.metric.kind), config.metric.normalize_inputs ? 1 : 0,
                  static_cast<int>(config.space), config.threshold, config.location_weight,
                  repeats, static_cast<unsigned long long>(seed), num_classes, dim);
    return buf;
}

} // namespace

std::vector<std::size_t> recognize_gallery(const std::vector<Vec>& photos,
                                           const LinearModel& classifier,
                                           const AttentionModel& attention,
                                           const SegmentationConfig& config,
                                           const std::vector<std::optional<GeoPoint>>& locations) {
    if (photos.empty()) throw ValidationError("recognize_gallery: empty gallery");
    if (classifier.dim() != attention.dim()) {
        throw ValidationError("recognize_gallery: classifier/attention dimension mismatch");
    }

    Boundaries bounds;
    if (config.space == SegmentationSpace::scores) {
        std::vector<Vec> scores;
        scores.reserve(photos.size());
        for (const Vec& x : photos) scores.push_back(predict_scores(classifier, x));
        bounds = detect_boundaries(scores, locations, config);
    } else {
        bounds = detect_boundaries(photos, locations, config);
    }

    std::vector<std::size_t> labels(photos.size());
    for (const auto& [begin, end] : bounds.spans()) {
        const std::vector<Vec> span(photos.begin() + begin, photos.begin() + end);
        const std::size_t event = decide(forward(attention, span));
        for (std::size_t t = begin; t < end; ++t) labels[t] = event;
    }
    return labels;
}

double per_image_accuracy(const std::vector<std::size_t>& predicted,
                          const std::vector<std::set<int>>& truth) {
    if (predicted.empty() || predicted.size() != truth.size()) {
        throw ValidationError("per_image_accuracy: empty or mismatched lists");
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (truth[i].count(static_cast<int>(predicted[i]))) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(predicted.size());
}

EvalReport run_shuffled_eval(const GalleryManifest& manifest, const FeatureStore& store,
                             const LinearModel& classifier, const AttentionModel& attention,
                             const SegmentationConfig& config, int repeats, std::uint64_t seed) {
    if (repeats < 1) throw ValidationError("run_shuffled_eval: repeats must be >= 1");

    EvalReport report;
    report.repeats = repeats;
    report.per_repeat.reserve(repeats);

    for (int r = 0; r < repeats; ++r) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));

        // Shuffle album order, then photo order inside every album.
        std::vector<std::size_t> album_order(manifest.albums.size());
        std::iota(album_order.begin(), album_order.end(), 0);
        rng.shuffle(album_order);

        std::vector<Vec> photos;
        std::vector<std::optional<GeoPoint>> locations;
        std::vector<std::set<int>> truth;
        photos.reserve(manifest.total_photos());
        for (std::size_t a : album_order) {
            const auto& album = manifest.albums[a];
            std::vector<std::size_t> photo_order(album.photos.size());
            std::iota(photo_order.begin(), photo_order.end(), 0);
            rng.shuffle(photo_order);
            for (std::size_t p : photo_order) {
                const auto& photo = album.photos[p];
                photos.push_back(store.at(photo.photo_id));
                locations.push_back(photo.location);
                truth.push_back(album.labels);
            }
        }

        const auto predicted = recognize_gallery(photos, classifier, attention, config, locations);
        report.per_repeat.push_back(per_image_accuracy(predicted, truth));
    }

    double mean = 0.0;
    for (double a : report.per_repeat) mean += a;
    mean /= static_cast<double>(repeats);
    double var = 0.0;
    for (double a : report.per_repeat) var += (a - mean) * (a - mean);
    var /= static_cast<double>(repeats);

    report.mean_accuracy = mean;
    report.std_accuracy = std::sqrt(var);
    report.config_digest =
        hex64(fnv1a(describe(config, repeats, seed, classifier.num_classes(), classifier.dim())));
    return report;
}

std::string format_report_line(const EvalReport& report) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.2f ± %.2f (repeats=%d)", 100.0 * report.mean_accuracy,
                  100.0 * report.std_accuracy, report.repeats);
    return buf;
}

} // namespace galev
