#include "doctest.h"

#include <cmath>

#include "galev/dataset_io.hpp"
#include "galev/errors.hpp"
#include "galev/gallery.hpp"
#include "galev/rng.hpp"
#include "galev/vector_math.hpp"
#include "test_util.hpp"

using namespace galev;
using galev::test::TempDir;
using galev::test::write_file;

namespace {

const char* kManifestTwoAlbums = R"({
  "num_classes": 2,
  "class_names": ["wedding", "hiking"],
  "albums": [
    {"id": "A", "labels": [0], "photos": [{"id": "a"}, {"id": "b"}]},
    {"id": "B", "labels": [1], "photos": [{"id": "c"}, {"id": "d"}, {"id": "e"}]}
  ]
})";

std::string feature_csv(int dim, const std::vector<std::string>& ids, double scale = 1.0) {
    std::string text = "photo_id";
    for (int i = 0; i < dim; ++i) text += ",f" + std::to_string(i);
    text += "\n";
    for (std::size_t r = 0; r < ids.size(); ++r) {
        text += ids[r];
        for (int i = 0; i < dim; ++i) {
            text += "," + std::to_string(scale * (static_cast<double>(r) + 0.25 * i));
        }
        text += "\n";
    }
    return text;
}

} // namespace

TEST_CASE("load_manifest reads counts from content") {
    TempDir dir("manifest");
    write_file(dir.file("m.json"), kManifestTwoAlbums);
    const GalleryManifest m = load_manifest(dir.file("m.json"));
    CHECK(m.num_classes == 2);
    CHECK(m.albums.size() == 2);
    CHECK(m.total_photos() == 5);
    CHECK(m.class_names[1] == "hiking");
    CHECK_FALSE(m.is_multi_label());
}

TEST_CASE("load_manifest rejects duplicate photo ids") {
    TempDir dir("manifest_dup");
    write_file(dir.file("m.json"), R"({
      "num_classes": 2, "class_names": ["x", "y"],
      "albums": [
        {"id": "A", "labels": [0], "photos": [{"id": "a"}]},
        {"id": "B", "labels": [1], "photos": [{"id": "a"}]}
      ]})");
    CHECK_THROWS_AS(load_manifest(dir.file("m.json")), ValidationError);
}

TEST_CASE("load_manifest rejects empty album list") {
    TempDir dir("manifest_empty");
    write_file(dir.file("m.json"),
               R"({"num_classes": 2, "class_names": ["x", "y"], "albums": []})");
    CHECK_THROWS_AS(load_manifest(dir.file("m.json")), ValidationError);
}

TEST_CASE("load_manifest rejects labels outside the class range") {
    TempDir dir("manifest_label");
    write_file(dir.file("m.json"), R"({
      "num_classes": 2, "class_names": ["x", "y"],
      "albums": [{"id": "A", "labels": [2], "photos": [{"id": "a"}]}]})");
    CHECK_THROWS_AS(load_manifest(dir.file("m.json")), ValidationError);
}

TEST_CASE("load_manifest rejects invalid coordinates and empty photo lists") {
    TempDir dir("manifest_geo");
    write_file(dir.file("m.json"), R"({
      "num_classes": 2, "class_names": ["x", "y"],
      "albums": [{"id": "A", "labels": [0],
                  "photos": [{"id": "a", "lat": 95.0, "lon": 10.0}]}]})");
    CHECK_THROWS_AS(load_manifest(dir.file("m.json")), ValidationError);

    write_file(dir.file("m2.json"), R"({
      "num_classes": 2, "class_names": ["x", "y"],
      "albums": [{"id": "A", "labels": [0], "photos": []}]})");
    CHECK_THROWS_AS(load_manifest(dir.file("m2.json")), ValidationError);
}

TEST_CASE("load_manifest reports malformed JSON as a format error") {
    TempDir dir("manifest_bad");
    write_file(dir.file("m.json"), "{ not json");
    CHECK_THROWS_AS(load_manifest(dir.file("m.json")), FormatError);
}

TEST_CASE("manifest round-trips through save and load") {
    TempDir dir("manifest_rt");
    write_file(dir.file("m.json"), R"({
      "num_classes": 3, "class_names": ["x", "y", "z"],
      "albums": [
        {"id": "A", "labels": [0, 2], "photos": [{"id": "a", "lat": 12.5, "lon": -7.25}]},
        {"id": "B", "labels": [1], "photos": [{"id": "b"}, {"id": "c"}]}
      ]})");
    const GalleryManifest first = load_manifest(dir.file("m.json"));
    save_manifest(first, dir.file("copy.json"));
    const GalleryManifest second = load_manifest(dir.file("copy.json"));
    CHECK(first == second);
}

TEST_CASE("load_feature_store infers dimension and covers the manifest") {
    TempDir dir("features");
    write_file(dir.file("m.json"), kManifestTwoAlbums);
    const GalleryManifest m = load_manifest(dir.file("m.json"));
    write_file(dir.file("f.csv"), feature_csv(16, {"a", "b", "c", "d", "e"}));
    const FeatureStore store = load_feature_store(dir.file("f.csv"), m);
    CHECK(store.dim == 16);
    CHECK(store.vectors.size() == 5);
    CHECK(store.at("c")[4] == doctest::Approx(3.0));
}

TEST_CASE("load_feature_store names the missing photo") {
    TempDir dir("features_missing");
    write_file(dir.file("m.json"), kManifestTwoAlbums);
    const GalleryManifest m = load_manifest(dir.file("m.json"));
    write_file(dir.file("f.csv"), feature_csv(4, {"a", "b", "c", "d"}));
    try {
        load_feature_store(dir.file("f.csv"), m);
        FAIL("expected MissingFeatureError");
    } catch (const MissingFeatureError& e) {
        CHECK(e.photo_id() == "e");
        CHECK(std::string(e.what()).find("e") != std::string::npos);
    }
}

TEST_CASE("load_feature_store rejects ragged rows") {
    TempDir dir("features_ragged");
    write_file(dir.file("m.json"), kManifestTwoAlbums);
    const GalleryManifest m = load_manifest(dir.file("m.json"));
    std::string csv = feature_csv(16, {"a", "b", "c", "d"});
    csv += "e,1.0,2.0\n"; // 2 values instead of 16
    write_file(dir.file("f.csv"), csv);
    CHECK_THROWS_AS(load_feature_store(dir.file("f.csv"), m), FormatError);
}

TEST_CASE("load_feature_store rejects non-finite values") {
    TempDir dir("features_nan");
    write_file(dir.file("m.json"), kManifestTwoAlbums);
    const GalleryManifest m = load_manifest(dir.file("m.json"));
    std::string csv = "photo_id,f0\na,1.0\nb,2.0\nc,nan\nd,4.0\ne,5.0\n";
    write_file(dir.file("f.csv"), csv);
    CHECK_THROWS_AS(load_feature_store(dir.file("f.csv"), m), ValidationError);
}

TEST_CASE("caption ingestion lowercases, splits and strips sentinels") {
    TempDir dir("captions");
    write_file(dir.file("c.tsv"),
               "a\t<START> A Dog on the Beach <END>\n"
               "b\t<start> <end>\n");
    const CaptionStore store = load_caption_store(dir.file("c.tsv"));
    CHECK(store.tokens("a") == std::vector<std::string>{"a", "dog", "on", "the", "beach"});
    CHECK(store.tokens("b").empty());
    CHECK(store.tokens("unknown").empty());
}

TEST_CASE("unfold broadcasts album labels to every photo") {
    TempDir dir("unfold");
    write_file(dir.file("m.json"), kManifestTwoAlbums);
    const GalleryManifest m = load_manifest(dir.file("m.json"));
    write_file(dir.file("f.csv"), feature_csv(3, {"a", "b", "c", "d", "e"}));
    const FeatureStore store = load_feature_store(dir.file("f.csv"), m);

    const LabeledFeatureSet set = unfold(m, store);
    REQUIRE(set.features.size() == 5);
    CHECK(set.labels == std::vector<std::set<int>>{{0}, {0}, {1}, {1}, {1}});
    CHECK(set.source_album == std::vector<std::size_t>{0, 0, 1, 1, 1});
    CHECK(set.num_classes == 2);
}

TEST_CASE("unfold handles single-photo albums and multi-label albums") {
    GalleryManifest m;
    m.num_classes = 6;
    m.class_names = {"c0", "c1", "c2", "c3", "c4", "c5"};
    m.albums.push_back({"solo", {1}, {{"p1", std::nullopt}}});
    m.albums.push_back({"pair", {2, 5}, {{"p2", std::nullopt}, {"p3", std::nullopt}}});
    FeatureStore store;
    store.dim = 2;
    store.vectors = {{"p1", {1, 0}}, {"p2", {0, 1}}, {"p3", {1, 1}}};

    const LabeledFeatureSet set = unfold(m, store);
    REQUIRE(set.features.size() == 3);
    CHECK(set.labels[0] == std::set<int>{1});
    CHECK(set.labels[1] == std::set<int>{2, 5});
    CHECK(set.labels[2] == std::set<int>{2, 5});
}

TEST_CASE("unfold preserves length and reconstructs album spans") {
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        GalleryManifest m;
        m.num_classes = 3;
        m.class_names = {"a", "b", "c"};
        FeatureStore store;
        store.dim = 2;
        std::size_t photo = 0;
        const std::size_t albums = 1 + rng.below(6);
        for (std::size_t a = 0; a < albums; ++a) {
            AlbumRecord album;
            album.album_id = "album" + std::to_string(a);
            album.labels.insert(static_cast<int>(rng.below(3)));
            const std::size_t size = 1 + rng.below(5);
            for (std::size_t p = 0; p < size; ++p) {
                const std::string id = "p" + std::to_string(photo++);
                album.photos.push_back({id, std::nullopt});
                store.vectors[id] = {rng.uniform01(), rng.uniform01()};
            }
            m.albums.push_back(std::move(album));
        }

        const LabeledFeatureSet set = unfold(m, store);
        CHECK(set.features.size() == m.total_photos());

        // Rebuild the per-album photo counts from source_album.
        std::vector<std::size_t> counts(m.albums.size(), 0);
        for (std::size_t i = 0; i < set.source_album.size(); ++i) {
            ++counts[set.source_album[i]];
            if (i > 0) CHECK(set.source_album[i] >= set.source_album[i - 1]);
        }
        for (std::size_t a = 0; a < m.albums.size(); ++a) {
            CHECK(counts[a] == m.albums[a].photos.size());
        }
    }
}

TEST_CASE("l2_normalize worked examples") {
    CHECK(l2_normalize({3.0, 4.0}) == Vec{0.6, 0.8});
    CHECK(l2_normalize({0.0, 0.0}) == Vec{0.0, 0.0});
    const Vec unit{1.0, 0.0, 0.0};
    CHECK(l2_normalize(unit) == unit);
}

TEST_CASE("l2_normalize is idempotent and scale invariant") {
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        Vec v(1 + rng.below(8));
        for (double& x : v) x = rng.uniform(-10.0, 10.0);

        const Vec once = l2_normalize(v);
        const Vec twice = l2_normalize(once);
        const double alpha = rng.uniform(0.001, 100.0);
        Vec scaled = v;
        for (double& x : scaled) x *= alpha;
        const Vec from_scaled = l2_normalize(scaled);

        for (std::size_t i = 0; i < v.size(); ++i) {
            CHECK(std::abs(twice[i] - once[i]) < 1e-12);
            CHECK(std::abs(from_scaled[i] - once[i]) < 1e-12);
        }
    }
}
