#include <benchmark/benchmark.h>

#include "galev/attention.hpp"
#include "galev/calibration.hpp"
#include "galev/evaluation.hpp"
#include "galev/linear_model.hpp"
#include "galev/rng.hpp"
#include "galev/segmentation.hpp"
#include "galev/synthetic.hpp"

using namespace galev;

namespace {

std::vector<Vec> random_vectors(std::size_t count, std::size_t dim, std::uint64_t seed,
                                bool non_negative = false) {
    Rng rng(seed);
    std::vector<Vec> out(count, Vec(dim));
    for (auto& v : out) {
        for (double& x : v) x = non_negative ? rng.uniform01() : rng.uniform(-1.0, 1.0);
    }
    return out;
}

void pairwise_euclidean(benchmark::State& state) {
    const auto vecs = random_vectors(2, static_cast<std::size_t>(state.range(0)), 1);
    const DistanceMetric metric{MetricKind::euclidean, false};
    for (auto _ : state) {
        benchmark::DoNotOptimize(pairwise_distance(vecs[0], vecs[1], metric));
    }
}
BENCHMARK(pairwise_euclidean)->Arg(16)->Arg(256)->Arg(1280);

void pairwise_chi_squared(benchmark::State& state) {
    const auto vecs = random_vectors(2, static_cast<std::size_t>(state.range(0)), 2, true);
    const DistanceMetric metric{MetricKind::chi_squared, true};
    for (auto _ : state) {
        benchmark::DoNotOptimize(pairwise_distance(vecs[0], vecs[1], metric));
    }
}
BENCHMARK(pairwise_chi_squared)->Arg(16)->Arg(256)->Arg(1280);

void boundary_detection(benchmark::State& state) {
    const auto gallery = random_vectors(static_cast<std::size_t>(state.range(0)), 16, 3);
    SegmentationConfig config;
    config.space = SegmentationSpace::embeddings;
    config.threshold = 0.8;
    for (auto _ : state) {
        benchmark::DoNotOptimize(detect_boundaries(gallery, config));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(boundary_detection)->Arg(1000)->Arg(10000);

void attention_forward(benchmark::State& state) {
    const std::size_t dim = 1280;
    const auto features = random_vectors(static_cast<std::size_t>(state.range(0)), dim, 4);
    Rng rng(5);
    AttentionModel model;
    model.q = Vec(dim);
    for (double& x : model.q) x = rng.uniform(-0.1, 0.1);
    model.dense_weights = Matrix(14, dim);
    for (double& x : model.dense_weights.data) x = rng.uniform(-0.1, 0.1);
    model.dense_bias = Vec(14, 0.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(forward(model, features));
    }
}
BENCHMARK(attention_forward)->Arg(10)->Arg(100);

void linear_training(benchmark::State& state) {
    SyntheticConfig cfg;
    cfg.num_classes = 5;
    cfg.dim = 16;
    cfg.albums_per_class = 8;
    cfg.album_size_min = 8;
    cfg.album_size_max = 15;
    cfg.noise_scale = 0.4;
    cfg.seed = 9;
    const auto [manifest, store] = generate_synthetic(cfg);
    const LabeledFeatureSet data = unfold(manifest, store);
    TrainConfig tc;
    tc.max_epochs = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(train_linear(data, tc));
    }
}
BENCHMARK(linear_training)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void threshold_calibration(benchmark::State& state) {
    SyntheticConfig cfg;
    cfg.num_classes = 5;
    cfg.dim = 16;
    cfg.albums_per_class = static_cast<int>(state.range(0));
    cfg.album_size_min = 8;
    cfg.album_size_max = 15;
    cfg.noise_scale = 0.4;
    cfg.album_scatter = 0.8;
    cfg.seed = 10;
    const auto [manifest, store] = generate_synthetic(cfg);

    TrainConfig tc;
    tc.max_epochs = 50;
    const LinearModel classifier = train_linear(unfold(manifest, store), tc);
    AttentionTrainConfig ac;
    ac.max_epochs = 20;
    ac.learning_rate = 0.05;
    const AttentionModel attention = train_attention(manifest, store, ac);

    CalibrationConfig cc;
    cc.space = SegmentationSpace::embeddings;
    for (auto _ : state) {
        benchmark::DoNotOptimize(calibrate(manifest, store, classifier, attention, cc, 7));
    }
}
BENCHMARK(threshold_calibration)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

void agglomerative_dendrogram(benchmark::State& state) {
    const auto gallery = random_vectors(static_cast<std::size_t>(state.range(0)), 16, 11);
    const DistanceMetric l2{MetricKind::euclidean, false};
    for (auto _ : state) {
        benchmark::DoNotOptimize(average_linkage_dendrogram(gallery, l2));
    }
}
BENCHMARK(agglomerative_dendrogram)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
