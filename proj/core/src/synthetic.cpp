#include "galev/synthetic.hpp"

#include <cmath>
#include <cstdio>

#include "galev/errors.hpp"
#include "galev/rng.hpp"
#include "galev/vector_math.hpp"

namespace galev {

namespace {

// Random orthonormal directions via Gram-Schmidt on Gaussian draws.
std::vector<Vec> orthonormal_directions(std::size_t count, std::size_t dim, Rng& rng) {
    std::vector<Vec> basis;
    basis.reserve(count);
    while (basis.size() < count) {
        Vec v(dim);
        for (double& x : v) x = rng.gaussian();
        for (const Vec& u : basis) {
            const double proj = dot(v, u);
            for (std::size_t i = 0; i < dim; ++i) v[i] -= proj * u[i];
        }
        const double norm = l2_norm(v);
        if (norm < 1e-8) continue; // redraw a degenerate direction
        for (double& x : v) x /= norm;
        basis.push_back(std::move(v));
    }
    return basis;
}

} // namespace

std::pair<GalleryManifest, FeatureStore> generate_synthetic(const SyntheticConfig& config) {
    if (config.num_classes < 2) throw ValidationError("generate_synthetic: num_classes < 2");
    if (static_cast<std::size_t>(config.num_classes) > config.dim) {
        throw ValidationError("generate_synthetic: num_classes exceeds dim (" +
                              std::to_string(config.num_classes) + " > " +
                              std::to_string(config.dim) + " orthogonal directions)");
    }
    if (config.albums_per_class < 1) {
        throw ValidationError("generate_synthetic: albums_per_class < 1");
    }
    if (config.album_size_min < 1 || config.album_size_min > config.album_size_max) {
        throw ValidationError("generate_synthetic: invalid album size range");
    }
    if (config.class_separation <= 0.0) {
        throw ValidationError("generate_synthetic: class_separation must be > 0");
    }
    if (config.album_scatter < 0.0) {
        throw ValidationError("generate_synthetic: album_scatter must be >= 0");
    }
    if (config.irrelevant_fraction < 0.0 || config.irrelevant_fraction >= 1.0) {
        throw ValidationError("generate_synthetic: irrelevant_fraction outside [0, 1)");
    }

    Rng rng(config.seed);
    const std::size_t num_classes = static_cast<std::size_t>(config.num_classes);
    const std::size_t scatter_dims =
        config.album_scatter > 0.0
            ? std::min<std::size_t>(kAlbumScatterDims, config.dim - num_classes)
            : 0;
    if (config.album_scatter > 0.0 && scatter_dims == 0) {
        throw ValidationError("generate_synthetic: no spare dimensions for album_scatter");
    }
    const auto axes = orthonormal_directions(num_classes + scatter_dims, config.dim, rng);

    // Shared direction with equal overlap on every class axis; blending it
    // with the class axis puts the pairwise angle under class_separation's
    // control. The scatter axes stay orthogonal to every mean.
    Vec shared(config.dim, 0.0);
    for (std::size_t c = 0; c < num_classes; ++c) {
        for (std::size_t i = 0; i < config.dim; ++i) shared[i] += axes[c][i];
    }
    shared = l2_normalize(shared);

    std::vector<Vec> means(num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
        Vec m(config.dim);
        for (std::size_t i = 0; i < config.dim; ++i) {
            m[i] = (1.0 - config.class_separation) * shared[i] +
                   config.class_separation * axes[c][i];
        }
        means[c] = l2_normalize(m);
    }

    GalleryManifest manifest;
    manifest.num_classes = config.num_classes;
    for (std::size_t c = 0; c < num_classes; ++c) {
        manifest.class_names.push_back("class_" + std::to_string(c));
    }

    FeatureStore store;
    store.dim = config.dim;

    char name[32];
    std::size_t album_counter = 0;
    std::size_t photo_counter = 0;
    const std::size_t size_spread = config.album_size_max - config.album_size_min + 1;
    for (std::size_t c = 0; c < num_classes; ++c) {
        for (int a = 0; a < config.albums_per_class; ++a) {
            AlbumRecord album;
            std::snprintf(name, sizeof name, "album_%04zu", album_counter++);
            album.album_id = name;
            album.labels.insert(static_cast<int>(c));
            const std::size_t album_size = config.album_size_min + rng.below(size_spread);

            Vec album_offset(config.dim, 0.0);
            for (std::size_t j = 0; j < scatter_dims; ++j) {
                const double amount = config.album_scatter * rng.gaussian();
                const Vec& axis = axes[num_classes + j];
                for (std::size_t i = 0; i < config.dim; ++i) {
                    album_offset[i] += amount * axis[i];
                }
            }

            for (std::size_t p = 0; p < album_size; ++p) {
                std::snprintf(name, sizeof name, "p%06zu", photo_counter++);
                PhotoRecord photo;
                photo.photo_id = name;

                // Irrelevant photos carry class-agnostic content but are
                // shot at the same event, so they keep the album offset.
                std::size_t source = c;
                if (config.irrelevant_fraction > 0.0 &&
                    rng.uniform01() < config.irrelevant_fraction) {
                    source = rng.below(num_classes);
                }
                Vec x(config.dim);
                for (std::size_t i = 0; i < config.dim; ++i) {
                    x[i] = means[source][i] + album_offset[i] +
                           config.noise_scale * rng.gaussian();
                }
                store.vectors.emplace(photo.photo_id, std::move(x));
                album.photos.push_back(std::move(photo));
            }
            manifest.albums.push_back(std::move(album));
        }
    }
    return {std::move(manifest), std::move(store)};
}

} // namespace galev
