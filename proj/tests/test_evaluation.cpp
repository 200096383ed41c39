#include "doctest.h"

#include <cmath>
#include <limits>

#include "galev/dataset_io.hpp"
#include "galev/errors.hpp"
#include "galev/evaluation.hpp"
#include "galev/rng.hpp"
#include "galev/synthetic.hpp"
#include "test_util.hpp"

using namespace galev;
using galev::test::TempDir;

namespace {

LinearModel identity_classifier(std::size_t n) {
    LinearModel model;
    model.weights = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) model.weights(i, i) = 4.0;
    model.bias = Vec(n, 0.0);
    return model;
}

AttentionModel identity_attention(std::size_t n) {
    AttentionModel model;
    model.q = Vec(n, 0.0);
    model.dense_weights = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) model.dense_weights(i, i) = 4.0;
    model.dense_bias = Vec(n, 0.0);
    return model;
}

double baseline_accuracy(const LinearModel& model, const GalleryManifest& manifest,
                         const FeatureStore& store) {
    std::size_t correct = 0;
    for (const auto& album : manifest.albums) {
        for (const auto& photo : album.photos) {
            const int predicted =
                static_cast<int>(decide(predict_scores(model, store.at(photo.photo_id))));
            if (album.labels.count(predicted)) ++correct;
        }
    }
    return static_cast<double>(correct) / manifest.total_photos();
}

} // namespace

TEST_CASE("recognize_gallery worked examples") {
    SegmentationConfig config;
    config.metric = {MetricKind::euclidean, false};
    config.space = SegmentationSpace::embeddings;
    const LinearModel classifier = identity_classifier(2);
    const AttentionModel attention = identity_attention(2);

    SUBCASE("single photo gallery") {
        config.threshold = 0.5;
        const std::vector<Vec> photos{{0.0, 1.0}};
        const auto labels = recognize_gallery(photos, classifier, attention, config);
        REQUIRE(labels.size() == 1);
        CHECK(labels[0] == decide(forward(attention, photos)));
    }
    SUBCASE("infinite threshold pools the whole gallery") {
        config.threshold = std::numeric_limits<double>::infinity();
        const std::vector<Vec> photos{{1, 0}, {0, 1}, {1, 0}, {0, 1}};
        const auto labels = recognize_gallery(photos, classifier, attention, config);
        for (std::size_t t = 1; t < labels.size(); ++t) CHECK(labels[t] == labels[0]);
    }
    SUBCASE("two well-separated constant albums split and classify per album") {
        config.threshold = 0.5; // intra distance 0, inter distance sqrt(2)
        const std::vector<Vec> photos{{1, 0}, {1, 0}, {0, 1}, {0, 1}, {0, 1}};
        const auto labels = recognize_gallery(photos, classifier, attention, config);
        CHECK(labels == std::vector<std::size_t>{0, 0, 1, 1, 1});
    }
}

TEST_CASE("per_image_accuracy counts any-label matches") {
    CHECK(per_image_accuracy({0, 1, 2}, {{0}, {1}, {2}}) == 1.0);
    CHECK(per_image_accuracy({3}, {{1, 3}}) == 1.0);
    CHECK(per_image_accuracy({0, 0}, {{1}, {2}}) == 0.0);
    CHECK(per_image_accuracy({1, 0}, {{1}, {2}}) == 0.5);
    CHECK_THROWS_AS(per_image_accuracy({0}, {{0}, {1}}), ValidationError);
}

TEST_CASE("run_shuffled_eval basics") {
    GalleryManifest manifest;
    manifest.num_classes = 2;
    manifest.class_names = {"x", "y"};
    manifest.albums.push_back({"A", {0}, {{"a1", {}}, {"a2", {}}}});
    manifest.albums.push_back({"B", {1}, {{"b1", {}}, {"b2", {}}}});

    SegmentationConfig config;
    config.space = SegmentationSpace::embeddings;
    config.threshold = 0.5;

    SUBCASE("identical features make the std zero across repeats") {
        FeatureStore store;
        store.dim = 2;
        for (const char* id : {"a1", "a2", "b1", "b2"}) store.vectors[id] = {1.0, 0.0};
        const EvalReport report = run_shuffled_eval(manifest, store, identity_classifier(2),
                                                    identity_attention(2), config, 10, 3);
        CHECK(report.repeats == 10);
        CHECK(report.std_accuracy == 0.0);
        for (double a : report.per_repeat) CHECK(a == report.per_repeat[0]);
    }
    SUBCASE("single repeat reports its own accuracy with zero std") {
        FeatureStore store;
        store.dim = 2;
        store.vectors = {{"a1", {1, 0}}, {"a2", {1, 0}}, {"b1", {0, 1}}, {"b2", {0, 1}}};
        const EvalReport report = run_shuffled_eval(manifest, store, identity_classifier(2),
                                                    identity_attention(2), config, 1, 5);
        CHECK(report.repeats == 1);
        CHECK(report.std_accuracy == 0.0);
        CHECK(report.mean_accuracy == report.per_repeat[0]);
        CHECK(report.mean_accuracy == 1.0);
    }
    SUBCASE("same seed and repeats reproduce the report exactly") {
        FeatureStore store;
        store.dim = 2;
        store.vectors = {{"a1", {1, 0}}, {"a2", {0.9, 0.1}}, {"b1", {0, 1}}, {"b2", {0.2, 0.8}}};
        const EvalReport a = run_shuffled_eval(manifest, store, identity_classifier(2),
                                               identity_attention(2), config, 5, 11);
        const EvalReport b = run_shuffled_eval(manifest, store, identity_classifier(2),
                                               identity_attention(2), config, 5, 11);
        CHECK(a == b);
    }
}

TEST_CASE("format_report_line prints percent mean and std") {
    EvalReport report;
    report.mean_accuracy = 0.8048;
    report.std_accuracy = 0.0101;
    report.repeats = 10;
    CHECK(format_report_line(report) == "80.48 ± 1.01 (repeats=10)");

    report.mean_accuracy = 0.5;
    report.std_accuracy = 0.0;
    report.repeats = 1;
    CHECK(format_report_line(report) == "50.00 ± 0.00 (repeats=1)");

    report.mean_accuracy = 1.0;
    CHECK(format_report_line(report) == "100.00 ± 0.00 (repeats=1)");
}

TEST_CASE("eval report moments stay consistent with the per-repeat list") {
    SyntheticConfig synth;
    synth.num_classes = 3;
    synth.dim = 8;
    synth.albums_per_class = 3;
    synth.album_size_min = 2;
    synth.album_size_max = 5;
    synth.class_separation = 0.8;
    synth.noise_scale = 0.25;
    synth.seed = 21;
    const auto [manifest, store] = generate_synthetic(synth);
    const LabeledFeatureSet data = unfold(manifest, store);
    TrainConfig tc;
    tc.max_epochs = 60;
    const LinearModel classifier = train_linear(data, tc);

    AttentionTrainConfig ac;
    ac.learning_rate = 0.05;
    ac.max_epochs = 100;
    ac.early_stop_patience = 10;
    const AttentionModel attention = train_attention(manifest, store, ac);

    SegmentationConfig config;
    config.space = SegmentationSpace::scores;
    config.metric = {MetricKind::euclidean, true};
    config.threshold = 0.2;
    const EvalReport report =
        run_shuffled_eval(manifest, store, classifier, attention, config, 7, 13);

    double mean = 0.0;
    for (double a : report.per_repeat) mean += a;
    mean /= report.per_repeat.size();
    double var = 0.0;
    for (double a : report.per_repeat) var += (a - mean) * (a - mean);
    var /= report.per_repeat.size();
    CHECK(std::abs(report.mean_accuracy - mean) < 1e-12);
    CHECK(std::abs(report.std_accuracy - std::sqrt(var)) < 1e-12);
    CHECK(report.per_repeat.size() == 7);
    CHECK_FALSE(report.config_digest.empty());
}

TEST_CASE("generate_synthetic without noise is exactly separable") {
    SyntheticConfig config;
    config.num_classes = 4;
    config.dim = 8;
    config.albums_per_class = 2;
    config.album_size_min = 2;
    config.album_size_max = 4;
    config.class_separation = 0.8;
    config.noise_scale = 0.0;
    config.irrelevant_fraction = 0.0;
    config.seed = 5;

    const auto [manifest, store] = generate_synthetic(config);
    validate(manifest);

    // Every photo equals its class mean.
    for (const auto& album : manifest.albums) {
        const Vec& first = store.at(album.photos.front().photo_id);
        for (const auto& photo : album.photos) CHECK(store.at(photo.photo_id) == first);
    }

    TrainConfig tc;
    tc.max_epochs = 300;
    const LinearModel classifier = train_linear(unfold(manifest, store), tc);
    CHECK(baseline_accuracy(classifier, manifest, store) == 1.0);
}

TEST_CASE("generate_synthetic is byte-identical for a fixed seed") {
    TempDir dir("synth");
    SyntheticConfig config;
    config.num_classes = 3;
    config.dim = 6;
    config.albums_per_class = 2;
    config.album_size_min = 2;
    config.album_size_max = 5;
    config.seed = 99;

    const auto [m1, s1] = generate_synthetic(config);
    const auto [m2, s2] = generate_synthetic(config);
    save_feature_store(s1, m1, dir.file("first.csv"));
    save_feature_store(s2, m2, dir.file("second.csv"));
    CHECK(galev::test::read_file(dir.file("first.csv")) ==
          galev::test::read_file(dir.file("second.csv")));
    CHECK(m1 == m2);
}

TEST_CASE("generate_synthetic rejects impossible configurations") {
    SyntheticConfig config;
    config.num_classes = 10;
    config.dim = 4;
    CHECK_THROWS_AS(generate_synthetic(config), ValidationError);
    config.num_classes = 3;
    config.album_size_min = 6;
    config.album_size_max = 2;
    CHECK_THROWS_AS(generate_synthetic(config), ValidationError);
}

TEST_CASE("tiny separation and heavy noise pull the baseline toward chance") {
    // Monte-Carlo check against the 1/C floor: train on one draw, score a
    // fresh draw from the same configuration.
    SyntheticConfig config;
    config.num_classes = 5;
    config.dim = 16;
    config.albums_per_class = 10;
    config.album_size_min = 8;
    config.album_size_max = 15;
    config.class_separation = 0.02;
    config.noise_scale = 4.0;
    config.seed = 31;

    const auto [train_manifest, train_store] = generate_synthetic(config);
    config.seed = 32;
    const auto [test_manifest, test_store] = generate_synthetic(config);

    TrainConfig tc;
    tc.max_epochs = 120;
    const LinearModel classifier = train_linear(unfold(train_manifest, train_store), tc);
    const double accuracy = baseline_accuracy(classifier, test_manifest, test_store);
    CHECK(accuracy > 0.05);
    CHECK(accuracy < 0.35); // 1/C = 0.2
}

TEST_CASE("noiseless pipeline recognizes every photo") {
    SyntheticConfig config;
    config.num_classes = 4;
    config.dim = 8;
    config.albums_per_class = 3;
    config.album_size_min = 3;
    config.album_size_max = 6;
    config.class_separation = 0.9;
    config.noise_scale = 0.0;
    config.seed = 44;
    const auto [manifest, store] = generate_synthetic(config);

    TrainConfig tc;
    tc.max_epochs = 300;
    const LinearModel classifier = train_linear(unfold(manifest, store), tc);

    AttentionTrainConfig ac;
    ac.learning_rate = 0.05;
    ac.max_epochs = 200;
    ac.early_stop_patience = 20;
    const AttentionModel attention = train_attention(manifest, store, ac);

    // Minimum distance between distinct class means.
    double min_between = 1e18;
    for (const auto& a : manifest.albums) {
        for (const auto& b : manifest.albums) {
            if (a.labels == b.labels) continue;
            min_between = std::min(
                min_between, pairwise_distance(store.at(a.photos[0].photo_id),
                                               store.at(b.photos[0].photo_id), DistanceMetric{}));
        }
    }
    REQUIRE(min_between > 0.0);

    SegmentationConfig seg;
    seg.space = SegmentationSpace::embeddings;
    seg.threshold = min_between / 2.0;
    const EvalReport report =
        run_shuffled_eval(manifest, store, classifier, attention, seg, 5, 17);
    CHECK(report.mean_accuracy == 1.0);
    CHECK(report.std_accuracy == 0.0);
}

TEST_CASE("in-album shuffles keep album decisions once boundaries are fixed") {
    SyntheticConfig config;
    config.num_classes = 3;
    config.dim = 8;
    config.albums_per_class = 2;
    config.album_size_min = 4;
    config.album_size_max = 6;
    config.class_separation = 0.9;
    config.noise_scale = 0.05;
    config.seed = 50;
    const auto [manifest, store] = generate_synthetic(config);

    AttentionTrainConfig ac;
    ac.learning_rate = 0.05;
    ac.max_epochs = 100;
    const AttentionModel attention = train_attention(manifest, store, ac);

    Rng rng(51);
    for (const auto& album : manifest.albums) {
        std::vector<Vec> features;
        for (const auto& photo : album.photos) features.push_back(store.at(photo.photo_id));
        const std::size_t before = decide(forward(attention, features));
        rng.shuffle(features);
        CHECK(decide(forward(attention, features)) == before);
    }
}
