#pragma once

#include <cstdint>
#include <utility>

#include "galev/gallery.hpp"

namespace galev {

// Desk-scale dataset generator: one unit-norm mean direction per class (the
// angle between them grows with class_separation), isotropic Gaussian photo
// noise, and an optional fraction of photos drawn from a random class while
// keeping their album's label.
//
// album_scatter adds a per-album offset drawn in a few reserved directions
// orthogonal to every class mean, shared by all photos of that album. It
// models what varies between events of the same class (venue, light, camera)
// without being class-informative: per-photo classification is unaffected,
// while consecutive photos of one album stay close to each other and albums
// sit apart, which is what distance-threshold segmentation feeds on. 0 keeps
// photos fully independent around their class mean.
struct SyntheticConfig {
    int num_classes = 5;
    std::size_t dim = 16;
    int albums_per_class = 8;
    std::size_t album_size_min = 8;
    std::size_t album_size_max = 15;
    double class_separation = 0.7; // in (0, 1]: 1 = orthogonal means, ->0 = coincident
    double noise_scale = 0.3;      // per-component standard deviation
    double album_scatter = 0.0;    // std of the album offset per reserved direction
    double irrelevant_fraction = 0.0;
    std::uint64_t seed = 0;
};

// Reserved directions used for album scatter (capped by dim - num_classes).
constexpr std::size_t kAlbumScatterDims = 4;

std::pair<GalleryManifest, FeatureStore> generate_synthetic(const SyntheticConfig& config);

} // namespace galev
