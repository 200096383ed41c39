#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "galev/errors.hpp"
#include "galev/rng.hpp"
#include "galev/segmentation.hpp"

using namespace galev;

namespace {

std::vector<Vec> points_1d(const std::vector<double>& xs) {
    std::vector<Vec> out;
    for (double x : xs) out.push_back({x});
    return out;
}

} // namespace

TEST_CASE("pairwise_distance worked examples") {
    const DistanceMetric l2{MetricKind::euclidean, false};
    const DistanceMetric chi2{MetricKind::chi_squared, false};

    CHECK(pairwise_distance({3, 0}, {0, 4}, l2) == doctest::Approx(5.0));
    CHECK(pairwise_distance({0.5, 0.5}, {0.5, 0.5}, chi2) == 0.0);
    // sum (a-b)^2/(a+b) with 0/0 terms skipped
    CHECK(pairwise_distance({1, 0}, {0, 1}, chi2) == doctest::Approx(2.0));
    CHECK(pairwise_distance({1, 0, 0}, {0, 1, 0}, chi2) == doctest::Approx(2.0));
}

TEST_CASE("pairwise_distance input validation") {
    const DistanceMetric chi2{MetricKind::chi_squared, false};
    CHECK_THROWS_AS(pairwise_distance({1, -0.5}, {0, 1}, chi2), std::domain_error);
    CHECK_THROWS_AS(pairwise_distance({1, 2}, {1, 2, 3}, DistanceMetric{}), ValidationError);
}

TEST_CASE("pairwise_distance is symmetric and zero only at equality") {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t dim = 1 + rng.below(6);
        Vec a(dim), b(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            a[i] = rng.uniform(0.0, 5.0);
            b[i] = rng.uniform(0.0, 5.0);
        }
        for (MetricKind kind : {MetricKind::euclidean, MetricKind::chi_squared}) {
            const DistanceMetric metric{kind, false};
            CHECK(pairwise_distance(a, b, metric) == pairwise_distance(b, a, metric));
            CHECK(pairwise_distance(a, a, metric) == 0.0);
            if (a != b) CHECK(pairwise_distance(a, b, metric) > 0.0);
        }
    }
}

TEST_CASE("normalized metrics ignore positive rescaling") {
    Rng rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        Vec a{rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0)};
        Vec b{rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0)};
        Vec a_scaled = a;
        const double alpha = rng.uniform(0.01, 50.0);
        for (double& x : a_scaled) x *= alpha;

        for (MetricKind kind : {MetricKind::euclidean, MetricKind::chi_squared}) {
            const DistanceMetric metric{kind, true};
            CHECK(std::abs(pairwise_distance(a, b, metric) -
                           pairwise_distance(a_scaled, b, metric)) < 1e-9);
        }
    }
}

TEST_CASE("detect_boundaries worked examples") {
    SegmentationConfig config;
    config.metric = {MetricKind::euclidean, false};
    config.space = SegmentationSpace::embeddings;

    SUBCASE("all identical vectors form a single album") {
        config.threshold = 0.1;
        const Boundaries b = detect_boundaries(points_1d({2, 2, 2, 2}), config);
        CHECK(b.ends == std::vector<std::size_t>{4});
    }
    SUBCASE("zero threshold splits every distinct step") {
        config.threshold = 0.0;
        const Boundaries b = detect_boundaries(points_1d({0, 1, 2, 3}), config);
        CHECK(b.ends == std::vector<std::size_t>{1, 2, 3, 4});
    }
    SUBCASE("hand-traced distances 0.1, 0.9, 0.1 with threshold 0.5") {
        config.threshold = 0.5;
        const Boundaries b = detect_boundaries(points_1d({0.0, 0.1, 1.0, 1.1}), config);
        CHECK(b.ends == std::vector<std::size_t>{2, 4});
        const auto spans = b.spans();
        REQUIRE(spans.size() == 2);
        CHECK(spans[0] == std::pair<std::size_t, std::size_t>{0, 2});
        CHECK(spans[1] == std::pair<std::size_t, std::size_t>{2, 4});
    }
}

TEST_CASE("geo distance term joins the photo distance") {
    // One degree of longitude on the equator.
    CHECK(geo_distance_km({0.0, 0.0}, {0.0, 1.0}) == doctest::Approx(111.195).epsilon(1e-4));
    CHECK(geo_distance_km({48.0, 11.0}, {48.0, 11.0}) == 0.0);

    SegmentationConfig config;
    config.metric = {MetricKind::euclidean, false};
    config.space = SegmentationSpace::embeddings;
    config.threshold = 0.5;
    config.location_weight = 0.01; // km scaled in

    // Identical vectors, but the middle pair is ~1112 km apart.
    const std::vector<Vec> photos = points_1d({1, 1, 1, 1});
    const std::vector<std::optional<GeoPoint>> locations{
        GeoPoint{0.0, 0.0}, GeoPoint{0.0, 0.0}, GeoPoint{0.0, 10.0}, GeoPoint{0.0, 10.0}};
    const Boundaries with_geo = detect_boundaries(photos, locations, config);
    CHECK(with_geo.ends == std::vector<std::size_t>{2, 4});

    config.location_weight = 0.0; // disabled: one album again
    CHECK(detect_boundaries(photos, locations, config).ends == std::vector<std::size_t>{4});

    // Missing coordinates on one side: the geo term is skipped for that pair.
    config.location_weight = 0.01;
    const std::vector<std::optional<GeoPoint>> partial{
        GeoPoint{0.0, 0.0}, GeoPoint{0.0, 0.0}, std::nullopt, GeoPoint{0.0, 10.0}};
    CHECK(detect_boundaries(photos, partial, config).ends == std::vector<std::size_t>{4});
}

TEST_CASE("boundary extremes and monotonicity") {
    Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t total = 1 + rng.below(30);
        std::vector<Vec> photos;
        for (std::size_t t = 0; t < total; ++t) {
            photos.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
        }
        SegmentationConfig config;
        config.metric = {MetricKind::euclidean, false};
        config.space = SegmentationSpace::embeddings;

        config.threshold = std::numeric_limits<double>::infinity();
        CHECK(detect_boundaries(photos, config).album_count() == 1);

        const auto distances =
            consecutive_distances(photos, {}, config.metric, 0.0);
        const double min_distance =
            distances.empty() ? 1.0 : *std::min_element(distances.begin(), distances.end());
        if (min_distance > 0.0) {
            config.threshold = min_distance / 2.0;
            CHECK(detect_boundaries(photos, config).album_count() == total);
        }

        // Album count never grows as the threshold grows.
        std::size_t previous = total + 1;
        for (double rho : {0.0, 0.1, 0.5, 1.0, 2.0, 4.0}) {
            config.threshold = rho;
            const Boundaries b = detect_boundaries(photos, config);
            CHECK(b.album_count() <= previous);
            previous = b.album_count();

            // Spans partition 1..T.
            std::size_t covered = 0;
            for (const auto& [begin, end] : b.spans()) {
                CHECK(begin < end);
                CHECK(begin == covered);
                covered = end;
            }
            CHECK(covered == total);
            CHECK(b.ends.back() == total);
        }
    }
}

TEST_CASE("agglomerative baseline worked examples") {
    const DistanceMetric l2{MetricKind::euclidean, false};

    CHECK(agglomerative_baseline(points_1d({3, 3, 3}), l2, 0.5) ==
          std::vector<std::size_t>{0, 0, 0});
    CHECK(agglomerative_baseline(points_1d({0, 10}), l2, 1.0) == std::vector<std::size_t>{0, 1});
    // Brute-forced on 4 points: merges at 0.1, 0.1, then 5.0 (blocked by 1.0).
    CHECK(agglomerative_baseline(points_1d({0.0, 0.1, 5.0, 5.1}), l2, 1.0) ==
          std::vector<std::size_t>{0, 0, 1, 1});
}

TEST_CASE("agglomerative clusters need not be contiguous") {
    const DistanceMetric l2{MetricKind::euclidean, false};
    const auto ids = agglomerative_baseline(points_1d({0.0, 9.0, 0.1}), l2, 0.5);
    CHECK(ids == std::vector<std::size_t>{0, 1, 0});
}

TEST_CASE("average linkage heights match a brute-force recomputation") {
    // The dendrogram's average linkage must equal the mean pairwise distance
    // between the two merged groups, recomputed from scratch.
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng.below(9);
        std::vector<Vec> pts;
        for (std::size_t i = 0; i < n; ++i) pts.push_back({rng.uniform(0.0, 4.0)});
        const DistanceMetric l2{MetricKind::euclidean, false};

        const auto merges = average_linkage_dendrogram(pts, l2);
        REQUIRE(merges.size() == n - 1);

        // Track members of every cluster id.
        std::vector<std::vector<std::size_t>> members(n + merges.size());
        for (std::size_t i = 0; i < n; ++i) members[i] = {i};
        for (std::size_t m = 0; m < merges.size(); ++m) {
            const auto& a = members[merges[m].a];
            const auto& b = members[merges[m].b];
            double sum = 0.0;
            for (std::size_t i : a) {
                for (std::size_t j : b) sum += pairwise_distance(pts[i], pts[j], l2);
            }
            const double expected = sum / static_cast<double>(a.size() * b.size());
            CHECK(merges[m].height == doctest::Approx(expected).epsilon(1e-9));
            members[n + m] = a;
            members[n + m].insert(members[n + m].end(), b.begin(), b.end());
        }

        // Heights never decrease (no inversions for average linkage).
        for (std::size_t m = 1; m < merges.size(); ++m) {
            CHECK(merges[m].height >= merges[m - 1].height - 1e-12);
        }
    }
}
