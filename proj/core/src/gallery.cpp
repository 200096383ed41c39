#include "galev/gallery.hpp"

#include <unordered_set>

#include "galev/errors.hpp"

namespace galev {

std::size_t GalleryManifest::total_photos() const {
    std::size_t n = 0;
    for (const auto& album : albums) n += album.photos.size();
    return n;
}

bool GalleryManifest::is_multi_label() const {
    for (const auto& album : albums) {
        if (album.labels.size() > 1) return true;
    }
    return false;
}

const Vec& FeatureStore::at(const std::string& photo_id) const {
    auto it = vectors.find(photo_id);
    if (it == vectors.end()) throw MissingFeatureError(photo_id);
    return it->second;
}

const std::vector<std::string>& CaptionStore::tokens(const std::string& photo_id) const {
    static const std::vector<std::string> empty;
    auto it = captions.find(photo_id);
    return it == captions.end() ? empty : it->second;
}

void validate(const GalleryManifest& manifest) {
    if (manifest.num_classes < 2) {
        throw ValidationError("manifest: num_classes must be >= 2, got " +
                              std::to_string(manifest.num_classes));
    }
    if (manifest.class_names.size() != static_cast<std::size_t>(manifest.num_classes)) {
        throw ValidationError("manifest: class_names has " +
                              std::to_string(manifest.class_names.size()) +
                              " entries, expected " + std::to_string(manifest.num_classes));
    }
    if (manifest.albums.empty()) {
        throw ValidationError("manifest: albums list is empty (at least one album required)");
    }

    std::unordered_set<std::string> seen_photos;
    std::unordered_set<std::string> seen_albums;
    for (const auto& album : manifest.albums) {
        if (album.album_id.empty()) throw ValidationError("manifest: empty album id");
        if (!seen_albums.insert(album.album_id).second) {
            throw ValidationError("manifest: duplicate album id \"" + album.album_id + "\"");
        }
        if (album.photos.empty()) {
            throw ValidationError("manifest: album \"" + album.album_id + "\" has no photos");
        }
        if (album.labels.empty()) {
            throw ValidationError("manifest: album \"" + album.album_id + "\" has no labels");
        }
        for (int label : album.labels) {
            if (label < 0 || label >= manifest.num_classes) {
                throw ValidationError("manifest: album \"" + album.album_id + "\" label " +
                                      std::to_string(label) + " outside [0, " +
                                      std::to_string(manifest.num_classes) + ")");
            }
        }
        for (const auto& photo : album.photos) {
            if (photo.photo_id.empty()) {
                throw ValidationError("manifest: empty photo id in album \"" +
                                      album.album_id + "\"");
            }
            if (!seen_photos.insert(photo.photo_id).second) {
                throw ValidationError("manifest: photo \"" + photo.photo_id +
                                      "\" appears in more than one album");
            }
            if (photo.location) {
                const auto& loc = *photo.location;
                if (loc.lat < -90.0 || loc.lat > 90.0 || loc.lon < -180.0 || loc.lon > 180.0) {
                    throw ValidationError("manifest: photo \"" + photo.photo_id +
                                          "\" has out-of-range coordinates");
                }
            }
        }
    }
}

LabeledFeatureSet unfold(const GalleryManifest& manifest, const FeatureStore& store) {
    LabeledFeatureSet out;
    out.num_classes = manifest.num_classes;
    out.features.reserve(manifest.total_photos());
    out.labels.reserve(manifest.total_photos());
    out.source_album.reserve(manifest.total_photos());
    for (std::size_t a = 0; a < manifest.albums.size(); ++a) {
        const auto& album = manifest.albums[a];
        for (const auto& photo : album.photos) {
            out.features.push_back(store.at(photo.photo_id));
            out.labels.push_back(album.labels);
            out.source_album.push_back(a);
        }
    }
    return out;
}

} // namespace galev
