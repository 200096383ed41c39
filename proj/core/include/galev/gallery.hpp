#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "galev/vector_math.hpp"

namespace galev {

struct GeoPoint {
    double lat = 0.0; // degrees, [-90, 90]
    double lon = 0.0; // degrees, [-180, 180]

    bool operator==(const GeoPoint&) const = default;
};

struct PhotoRecord {
    std::string photo_id;
    std::optional<GeoPoint> location;

    bool operator==(const PhotoRecord&) const = default;
};

// A contiguous group of photos sharing one event. labels holds one class for
// single-label datasets and the full set for multi-label ones.
struct AlbumRecord {
    std::string album_id;
    std::set<int> labels;
    std::vector<PhotoRecord> photos;

    bool operator==(const AlbumRecord&) const = default;
};

struct GalleryManifest {
    int num_classes = 0;
    std::vector<std::string> class_names;
    std::vector<AlbumRecord> albums;

    std::size_t total_photos() const;
    bool is_multi_label() const; // any album with more than one label

    bool operator==(const GalleryManifest&) const = default;
};

// Per-photo feature vectors, uniform dimension.
struct FeatureStore {
    std::size_t dim = 0;
    std::unordered_map<std::string, Vec> vectors;

    // Throws MissingFeatureError when absent.
    const Vec& at(const std::string& photo_id) const;

    bool operator==(const FeatureStore&) const = default;
};

// Per-photo token lists; sentinel tokens are stripped at ingestion and
// never appear here.
struct CaptionStore {
    std::unordered_map<std::string, std::vector<std::string>> captions;

    // Empty list when the photo has no caption.
    const std::vector<std::string>& tokens(const std::string& photo_id) const;
};

// Flat training set: one entry per photo, labels copied down from its album.
struct LabeledFeatureSet {
    int num_classes = 0;
    std::vector<Vec> features;
    std::vector<std::set<int>> labels;
    std::vector<std::size_t> source_album;
};

// Throws ValidationError on any violated manifest invariant.
void validate(const GalleryManifest& manifest);

// Album-label broadcast onto every photo, album and in-album order preserved.
LabeledFeatureSet unfold(const GalleryManifest& manifest, const FeatureStore& store);

} // namespace galev
