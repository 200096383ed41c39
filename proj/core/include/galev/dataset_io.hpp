#pragma once

#include <string>

#include "galev/gallery.hpp"

namespace galev {

// Manifest JSON:
//   { "num_classes": C, "class_names": [...],
//     "albums": [ { "id", "labels": [int], "photos": [{"id", "lat"?, "lon"?}] } ] }
GalleryManifest load_manifest(const std::string& path);
void save_manifest(const GalleryManifest& manifest, const std::string& path);

// Feature CSV: header "photo_id,f0,...,f{D-1}", one row per photo.
// Every manifest photo must be covered; extra rows are kept.
FeatureStore load_feature_store(const std::string& path, const GalleryManifest& manifest);

// Rows are written in manifest order so output is reproducible byte for byte.
void save_feature_store(const FeatureStore& store, const GalleryManifest& manifest,
                        const std::string& path);

// Caption TSV: "photo_id<TAB>caption text". Tokens are whitespace-split and
// lowercased; <start>/<end> sentinels are dropped here.
CaptionStore load_caption_store(const std::string& path);

} // namespace galev
