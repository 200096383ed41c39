// Command-line front end: dataset generation, training, calibration,
// segmentation, prediction, fusion and evaluation, all seeded and writing
// JSON artifacts with provenance digests.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "galev/attention.hpp"
#include "galev/calibration.hpp"
#include "galev/captions.hpp"
#include "galev/dataset_io.hpp"
#include "galev/errors.hpp"
#include "galev/evaluation.hpp"
#include "galev/gallery.hpp"
#include "galev/linear_model.hpp"
#include "galev/model_io.hpp"
#include "galev/segmentation.hpp"
#include "galev/synthetic.hpp"

namespace {

using nlohmann::json;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string digest_of(const json& config) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(config.dump())));
    return buf;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw galev::FormatError("cannot write file: " + path);
    out << text;
    if (text.empty() || text.back() != '\n') out << "\n";
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw galev::FormatError("cannot open file: " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// The effective merged option set is written next to every artifact, and its
// digest plus the seed are embedded into each JSON artifact.
struct Provenance {
    json effective;
    std::string digest;
    std::uint64_t seed = 0;

    explicit Provenance(const std::string& command, json options, std::uint64_t seed_value)
        : effective(std::move(options)), seed(seed_value) {
        effective["command"] = command;
        digest = digest_of(effective);
    }

    void write_config(const std::string& artifact_path) const {
        json doc = effective;
        doc["config_digest"] = digest;
        write_text(artifact_path + ".config.json", doc.dump(2));
    }

    void write_artifact(const std::string& path, const std::string& artifact_json) const {
        json doc = json::parse(artifact_json);
        doc["config_digest"] = digest;
        doc["seed"] = seed;
        write_text(path, doc.dump(2));
        write_config(path);
    }
};

// Values from --config act as defaults; explicit flags win.
class ConfigFile {
public:
    void load(const std::string& path) {
        if (path.empty()) return;
        try {
            doc_ = json::parse(read_text(path));
        } catch (const json::parse_error& e) {
            throw galev::FormatError(path + ": " + e.what());
        }
    }

    template <typename T>
    void merge(const CLI::App& cmd, const std::string& name, T& value) const {
        if (!doc_.is_object()) return;
        if (cmd.count("--" + name) == 0 && doc_.contains(name)) {
            try {
                value = doc_.at(name).get<T>();
            } catch (const json::exception& e) {
                throw galev::ValidationError("config key \"" + name + "\": " + e.what());
            }
        }
    }

private:
    json doc_;
};

galev::DistanceMetric metric_from(const std::string& name, bool normalize) {
    return {galev::metric_kind_from_name(name), normalize};
}

std::set<std::string> load_stopwords(const std::string& path) {
    std::set<std::string> words;
    std::ifstream in(path);
    if (!in) throw galev::FormatError("cannot open file: " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::transform(line.begin(), line.end(), line.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        words.insert(line);
    }
    return words;
}

bool resolve_multi_label(const std::string& mode, const galev::GalleryManifest& manifest) {
    if (mode == "auto") return manifest.is_multi_label();
    if (mode == "on") return true;
    if (mode == "off") return false;
    throw galev::ValidationError("--multi-label must be auto, on or off");
}

double threshold_from_flags(const std::optional<double>& threshold,
                            const std::string& calibration_path) {
    if (threshold && !calibration_path.empty()) {
        throw galev::ValidationError("pass either --threshold or --calibration, not both");
    }
    if (threshold) return *threshold;
    if (!calibration_path.empty()) {
        return galev::load_calibration_result(calibration_path).threshold;
    }
    throw galev::ValidationError("a threshold is required (--threshold or --calibration)");
}

// ---------------------------------------------------------------------------
// subcommands

struct SynthArgs {
    int classes = 5;
    std::size_t dim = 16;
    int albums_per_class = 8;
    std::size_t size_min = 8;
    std::size_t size_max = 15;
    double separation = 0.7;
    double noise = 0.3;
    double scatter = 0.0;
    double irrelevant = 0.0;
    std::uint64_t seed = 0;
    std::string out;
    std::string config_path;
};

void run_synth(const CLI::App& cmd, SynthArgs args) {
    ConfigFile config;
    config.load(args.config_path);
    config.merge(cmd, "classes", args.classes);
    config.merge(cmd, "dim", args.dim);
    config.merge(cmd, "albums-per-class", args.albums_per_class);
    config.merge(cmd, "size-min", args.size_min);
    config.merge(cmd, "size-max", args.size_max);
    config.merge(cmd, "separation", args.separation);
    config.merge(cmd, "noise", args.noise);
    config.merge(cmd, "scatter", args.scatter);
    config.merge(cmd, "irrelevant", args.irrelevant);
    config.merge(cmd, "seed", args.seed);

    galev::SyntheticConfig synth;
    synth.num_classes = args.classes;
    synth.dim = args.dim;
    synth.albums_per_class = args.albums_per_class;
    synth.album_size_min = args.size_min;
    synth.album_size_max = args.size_max;
    synth.class_separation = args.separation;
    synth.noise_scale = args.noise;
    synth.album_scatter = args.scatter;
    synth.irrelevant_fraction = args.irrelevant;
    synth.seed = args.seed;

    const auto [manifest, store] = galev::generate_synthetic(synth);
    std::filesystem::create_directories(args.out);
    const std::string manifest_path = (std::filesystem::path(args.out) / "manifest.json").string();
    const std::string features_path = (std::filesystem::path(args.out) / "features.csv").string();

    const Provenance prov("synth",
                          json{{"classes", args.classes},
                               {"dim", args.dim},
                               {"albums-per-class", args.albums_per_class},
                               {"size-min", args.size_min},
                               {"size-max", args.size_max},
                               {"separation", args.separation},
                               {"noise", args.noise},
                               {"scatter", args.scatter},
                               {"irrelevant", args.irrelevant},
                               {"seed", args.seed}},
                          args.seed);

    galev::save_manifest(manifest, manifest_path);
    // Re-emit with provenance keys; loaders ignore the extra fields.
    json doc = json::parse(read_text(manifest_path));
    doc["config_digest"] = prov.digest;
    doc["seed"] = args.seed;
    write_text(manifest_path, doc.dump(2));
    galev::save_feature_store(store, manifest, features_path);
    prov.write_config((std::filesystem::path(args.out) / "synth").string());
    std::cout << "wrote " << manifest_path << " (" << manifest.albums.size() << " albums, "
              << manifest.total_photos() << " photos, D=" << store.dim << ")\n";
}

struct TrainLinearArgs {
    std::string manifest;
    std::string features;
    std::string out;
    std::string multi_label = "auto";
    bool normalize_features = false;
    double l2 = 1e-4;
    double lr = 0.05;
    int epochs = 200;
    int patience = 10;
    std::uint64_t seed = 0;
    std::string config_path;
};

void run_train_linear(const CLI::App& cmd, TrainLinearArgs args) {
    ConfigFile config;
    config.load(args.config_path);
    config.merge(cmd, "manifest", args.manifest);
    config.merge(cmd, "features", args.features);
    config.merge(cmd, "multi-label", args.multi_label);
    config.merge(cmd, "normalize-features", args.normalize_features);
    config.merge(cmd, "l2", args.l2);
    config.merge(cmd, "lr", args.lr);
    config.merge(cmd, "epochs", args.epochs);
    config.merge(cmd, "patience", args.patience);
    config.merge(cmd, "seed", args.seed);

    const galev::GalleryManifest manifest = galev::load_manifest(args.manifest);
    const galev::FeatureStore store = galev::load_feature_store(args.features, manifest);
    galev::LabeledFeatureSet data = galev::unfold(manifest, store);
    if (args.normalize_features) {
        for (auto& f : data.features) f = galev::l2_normalize(f);
    }

    galev::TrainConfig tc;
    tc.l2_penalty = args.l2;
    tc.learning_rate = args.lr;
    tc.max_epochs = args.epochs;
    tc.early_stop_patience = args.patience;
    tc.seed = args.seed;
    tc.multi_label = resolve_multi_label(args.multi_label, manifest);

    const galev::LinearModel model = galev::train_linear(data, tc);
    const Provenance prov("train-linear",
                          json{{"manifest", args.manifest},
                               {"features", args.features},
                               {"multi-label", args.multi_label},
                               {"normalize-features", args.normalize_features},
                               {"l2", args.l2},
                               {"lr", args.lr},
                               {"epochs", args.epochs},
                               {"patience", args.patience},
                               {"seed", args.seed}},
                          args.seed);
    prov.write_artifact(args.out, galev::linear_model_to_json(model));
    std::cout << "wrote " << args.out << " (C=" << model.num_classes() << ", D=" << model.dim()
              << ")\n";
}

struct TrainAttentionArgs {
    std::string manifest;
    std::string features;
    std::string out;
    std::size_t subset_size = 10;
    std::size_t subsets_per_album = 1;
    double lr = 0.001;
    int epochs = 10;
    int patience = 2;
    std::uint64_t seed = 0;
    std::string config_path;
};

void run_train_attention(const CLI::App& cmd, TrainAttentionArgs args) {
    ConfigFile config;
    config.load(args.config_path);
    config.merge(cmd, "manifest", args.manifest);
    config.merge(cmd, "features", args.features);
    config.merge(cmd, "subset-size", args.subset_size);
    config.merge(cmd, "subsets-per-album", args.subsets_per_album);
    config.merge(cmd, "lr", args.lr);
    config.merge(cmd, "epochs", args.epochs);
    config.merge(cmd, "patience", args.patience);
    config.merge(cmd, "seed", args.seed);

    const galev::GalleryManifest manifest = galev::load_manifest(args.manifest);
    const galev::FeatureStore store = galev::load_feature_store(args.features, manifest);

    galev::AttentionTrainConfig tc;
    tc.subset_size = args.subset_size;
    tc.subsets_per_album = args.subsets_per_album;
    tc.learning_rate = args.lr;
    tc.max_epochs = args.epochs;
    tc.early_stop_patience = args.patience;
    tc.seed = args.seed;

    const galev::AttentionModel model = galev::train_attention(manifest, store, tc);
    const Provenance prov("train-attention",
                          json{{"manifest", args.manifest},
                               {"features", args.features},
                               {"subset-size", args.subset_size},
                               {"subsets-per-album", args.subsets_per_album},
                               {"lr", args.lr},
                               {"epochs", args.epochs},
                               {"patience", args.patience},
                               {"seed", args.seed}},
                          args.seed);
    prov.write_artifact(args.out, galev::attention_model_to_json(model));
    std::cout << "wrote " << args.out << (model.multi_label ? " (multi-label)\n" : "\n");
}

struct BuildVocabArgs {
    std::string captions;
    std::string manifest;
    std::size_t max_size = 5000;
    std::string stopwords;
    std::string out;
    std::string config_path;
};

void run_build_vocab(const CLI::App& cmd, BuildVocabArgs args) {
    ConfigFile config;
    config.load(args.config_path);
    config.merge(cmd, "captions", args.captions);
    config.merge(cmd, "manifest", args.manifest);
    config.merge(cmd, "max-size", args.max_size);
    config.merge(cmd, "stopwords", args.stopwords);

    const galev::GalleryManifest manifest = galev::load_manifest(args.manifest);
    const galev::CaptionStore captions = galev::load_caption_store(args.captions);
    std::vector<std::string> train_ids;
    for (const auto& album : manifest.albums) {
        for (const auto& photo : album.photos) train_ids.push_back(photo.photo_id);
    }

    std::set<std::string> stopwords;
    const galev::Vocabulary vocab =
        args.stopwords.empty()
            ? galev::build_vocabulary(captions, train_ids, args.max_size)
            : galev::build_vocabulary(captions, train_ids, args.max_size,
                                      (stopwords = load_stopwords(args.stopwords), &stopwords));

    galev::save_vocabulary(vocab, args.out);
    const Provenance prov("build-vocab",
                          json{{"captions", args.captions},
                               {"manifest", args.manifest},
                               {"max-size", args.max_size},
                               {"stopwords", args.stopwords}},
                          0);
    prov.write_config(args.out);
    std::cout << "wrote " << args.out << " (" << vocab.size() << " words)\n";
}

struct TrainTextArgs {
    std::string captions;
    std::string vocab;
    std::string manifest;
    std::string out;
    std::string multi_label = "auto";
    double l2 = 1e-4;
    double lr = 0.05;
    int epochs = 200;
    int patience = 10;
    std::uint64_t seed = 0;
    std::string config_path;
};

void run_train_text(const CLI::App& cmd, TrainTextArgs args) {
    ConfigFile config;
    config.load(args.config_path);
    config.merge(cmd, "captions", args.captions);
    config.merge(cmd, "vocab", args.vocab);
    config.merge(cmd, "manifest", args.manifest);
    config.merge(cmd, "multi-label", args.multi_label);
    config.merge(cmd, "l2", args.l2);
    config.merge(cmd, "lr", args.lr);
    config.merge(cmd, "epochs", args.epochs);
    config.merge(cmd, "patience", args.patience);
    config.merge(cmd, "seed", args.seed);

    const galev::GalleryManifest manifest = galev::load_manifest(args.manifest);
    const galev::CaptionStore captions = galev::load_caption_store(args.captions);
    const galev::Vocabulary vocab = galev::load_vocabulary(args.vocab);

    std::vector<galev::SparseCaptionVector> encoded;
    std::vector<std::set<int>> labels;
    for (const auto& album : manifest.albums) {
        for (const auto& photo : album.photos) {
            encoded.push_back(galev::encode_one_hot(captions.tokens(photo.photo_id), vocab));
            labels.push_back(album.labels);
        }
    }

    galev::TrainConfig tc;
    tc.l2_penalty = args.l2;
    tc.learning_rate = args.lr;
    tc.max_epochs = args.epochs;
    tc.early_stop_patience = args.patience;
    tc.seed = args.seed;
    tc.multi_label = resolve_multi_label(args.multi_label, manifest);

    const galev::LinearModel model =
        galev::train_text_classifier(encoded, labels, manifest.num_classes, vocab.size(), tc);
    const Provenance prov("train-text",
                          json{{"captions", args.captions},
                               {"vocab", args.vocab},
                               {"manifest", args.manifest},
                               {"multi-label", args.multi_label},
                               {"l2", args.l2},
                               {"lr", args.lr},
                               {"epochs", args.epochs},
                               {"patience", args.patience},
                               {"seed", args.seed}},
                          args.seed);
    prov.write_artifact(args.out, galev::linear_model_to_json(model));
    std::cout << "wrote " << args.out << " (|V|=" << vocab.size() << ")\n";
}

struct CalibrateArgs {
    std::string manifest;
    std::string features;
    std::string classifier;
    std::string attention;
    std::string metric = "l2";
    std::string space = "scores";
    bool normalize = false;
    double location_weight = 0.0;
    std::size_t repeats = 1;
    std::uint64_t seed = 0;
    std::string out;
    std::string config_path;
};

void run_calibrate(const CLI::App& cmd, CalibrateArgs args) {
    ConfigFile config;
    config.load(args.config_path);
    config.merge(cmd, "manifest", args.manifest);
    config.merge(cmd, "features", args.features);
    config.merge(cmd, "classifier", args.classifier);
    config.merge(cmd, "attention", args.attention);
    config.merge(cmd, "metric", args.metric);
    config.merge(cmd, "space", args.space);
    config.merge(cmd, "normalize", args.normalize);
    config.merge(cmd, "location-weight", args.location_weight);
    config.merge(cmd, "repeats", args.repeats);
    config.merge(cmd, "seed", args.seed);

    const galev::GalleryManifest manifest = galev::load_manifest(args.manifest);
    const galev::FeatureStore store = galev::load_feature_store(args.features, manifest);
    const galev::LinearModel classifier = galev::load_linear_model(args.classifier);
    const galev::AttentionModel attention = galev::load_attention_model(args.attention);

    galev::CalibrationConfig cc;
    cc.metric = metric_from(args.metric, args.normalize);
    cc.space = galev::space_from_name(args.space);
    cc.location_weight = args.location_weight;
    cc.repeats = args.repeats;

    const galev::CalibrationResult result =
        galev::calibrate(manifest, store, classifier, attention, cc, args.seed);
    const Provenance prov("calibrate",
                          json{{"manifest", args.manifest},
                               {"features", args.features},
                               {"classifier", args.classifier},
                               {"attention", args.attention},
                               {"metric", args.metric},
                               {"space", args.space},
                               {"normalize", args.normalize},
                               {"location-weight", args.location_weight},
                               {"repeats", args.repeats},
                               {"seed", args.seed}},
                          args.seed);
    prov.write_artifact(args.out, galev::calibration_result_to_json(result));
    char line[128];
    std::snprintf(line, sizeof line, "threshold=%.6g accuracy=%.4f (%zu candidates)",
                  result.threshold, result.accuracy, result.candidates_evaluated);
    std::cout << line << "\n";
}

struct SegmentArgs {
    std::string manifest;
    std::string features;
    std::string classifier;
    std::string metric = "l2";
    std::string space = "scores";
    bool normalize = false;
    double threshold = 0.0;
    double location_weight = 0.0;
    std::string out;
    std::string config_path;
};

void run_segment(const CLI::App& cmd, SegmentArgs args) {
    ConfigFile config;
    config.load(args.config_path);
    config.merge(cmd, "manifest", args.manifest);
    config.merge(cmd, "features", args.features);
    config.merge(cmd, "classifier", args.classifier);
    config.merge(cmd, "metric", args.metric);
    config.merge(cmd, "space", args.space);
    config.merge(cmd, "normalize", args.normalize);
    config.merge(cmd, "threshold", args.threshold);
    config.merge(cmd, "location-weight", args.location_weight);

    const galev::GalleryManifest manifest = galev::load_manifest(args.manifest);
    const galev::FeatureStore store = galev::load_feature_store(args.features, manifest);

    galev::SegmentationConfig sc;
    sc.metric = metric_from(args.metric, args.normalize);
    sc.space = galev::space_from_name(args.space);
    sc.threshold = args.threshold;
    sc.location_weight = args.location_weight;

    std::vector<galev::Vec> gallery;
    std::vector<std::optional<galev::GeoPoint>> locations;
    for (const auto& album : manifest.albums) {
        for (const auto& photo : album.photos) {
            gallery.push_back(store.at(photo.photo_id));
            locations.push_back(photo.location);
        }
    }
    if (sc.space == galev::SegmentationSpace::scores) {
        if (args.classifier.empty()) {
            throw galev::ValidationError("--classifier is required with --space scores");
        }
        const galev::LinearModel classifier = galev::load_linear_model(args.classifier);
        for (auto& v : gallery) v = galev::predict_scores(classifier, v);
    }

    const galev::Boundaries bounds = galev::detect_boundaries(gallery, locations, sc);
    const Provenance prov("segment",
                          json{{"manifest", args.manifest},
                               {"features", args.features},
                               {"classifier", args.classifier},
                               {"metric", args.metric},
                               {"space", args.space},
                               {"normalize", args.normalize},
                               {"threshold", args.threshold},
                               {"location-weight", args.location_weight}},
                          0);
    prov.write_artifact(args.out, galev::boundaries_to_json(bounds, sc));
    std::cout << "detected " << bounds.album_count() << " albums over " << gallery.size()
              << " photos\n";
}

struct PredictArgs {
    std::string manifest;
    std::string features;
    std::string classifier;
    std::string attention;
    std::string metric = "l2";
    std::string space = "scores";
    bool normalize = false;
    std::optional<double> threshold;
    std::string calibration;
    double location_weight = 0.0;
    bool true_boundaries = false;
    std::string out;
    std::string config_path;
};

void run_predict(const CLI::App& cmd, PredictArgs args) {
    ConfigFile config;
    config.load(args.config_path);
    config.merge(cmd, "manifest", args.manifest);
    config.merge(cmd, "features", args.features);
    config.merge(cmd, "classifier", args.classifier);
    config.merge(cmd, "attention", args.attention);
    config.merge(cmd, "metric", args.metric);
    config.merge(cmd, "space", args.space);
    config.merge(cmd, "normalize", args.normalize);
    config.merge(cmd, "calibration", args.calibration);
    config.merge(cmd, "true-boundaries", args.true_boundaries);
    config.merge(cmd, "location-weight", args.location_weight);

    const galev::GalleryManifest manifest = galev::load_manifest(args.manifest);
    const galev::FeatureStore store = galev::load_feature_store(args.features, manifest);
    const galev::LinearModel classifier = galev::load_linear_model(args.classifier);
    const galev::AttentionModel attention = galev::load_attention_model(args.attention);

    galev::SegmentationConfig sc;
    sc.metric = metric_from(args.metric, args.normalize);
    sc.space = galev::space_from_name(args.space);
    sc.threshold =
        args.true_boundaries ? 0.0 : threshold_from_flags(args.threshold, args.calibration);
    sc.location_weight = args.location_weight;

    std::vector<galev::Vec> gallery;
    std::vector<std::optional<galev::GeoPoint>> locations;
    std::vector<std::string> photo_ids;
    std::vector<std::set<int>> truth;
    for (const auto& album : manifest.albums) {
        for (const auto& photo : album.photos) {
            gallery.push_back(store.at(photo.photo_id));
            locations.push_back(photo.location);
            photo_ids.push_back(photo.photo_id);
            truth.push_back(album.labels);
        }
    }

    std::vector<std::size_t> predicted;
    double album_accuracy = -1.0;
    if (args.true_boundaries) {
        // Classify each manifest album as-is instead of detecting borders;
        // the reference point for known-album evaluation.
        predicted.resize(gallery.size());
        std::size_t cursor = 0;
        std::size_t albums_correct = 0;
        for (const auto& album : manifest.albums) {
            const std::vector<galev::Vec> span(gallery.begin() + cursor,
                                               gallery.begin() + cursor + album.photos.size());
            const std::size_t event = galev::decide(galev::forward(attention, span));
            if (album.labels.count(static_cast<int>(event))) ++albums_correct;
            for (std::size_t t = 0; t < album.photos.size(); ++t) predicted[cursor + t] = event;
            cursor += album.photos.size();
        }
        album_accuracy = static_cast<double>(albums_correct) / manifest.albums.size();
    } else {
        predicted = galev::recognize_gallery(gallery, classifier, attention, sc, locations);
    }
    const double accuracy = galev::per_image_accuracy(predicted, truth);

    json predictions = json::array();
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        predictions.push_back(json{{"photo_id", photo_ids[i]}, {"label", predicted[i]}});
    }
    json artifact{{"predictions", predictions},
                  {"accuracy", accuracy},
                  {"threshold", sc.threshold},
                  {"space", galev::space_name(sc.space)},
                  {"metric", galev::metric_kind_name(sc.metric.kind)}};
    if (album_accuracy >= 0.0) artifact["album_accuracy"] = album_accuracy;

    const Provenance prov("predict",
                          json{{"manifest", args.manifest},
                               {"features", args.features},
                               {"classifier", args.classifier},
                               {"attention", args.attention},
                               {"metric", args.metric},
                               {"space", args.space},
                               {"normalize", args.normalize},
                               {"threshold", sc.threshold},
                               {"calibration", args.calibration},
                               {"true-boundaries", args.true_boundaries},
                               {"location-weight", args.location_weight}},
                          0);
    prov.write_artifact(args.out, artifact.dump());
    char line[96];
    if (album_accuracy >= 0.0) {
        std::snprintf(line, sizeof line, "per-image accuracy %.4f, album accuracy %.4f", accuracy,
                      album_accuracy);
    } else {
        std::snprintf(line, sizeof line, "per-image accuracy %.4f", accuracy);
    }
    std::cout << line << "\n";
}

struct FuseWeightArgs {
    std::string manifest;
    std::string features;
    std::string captions;
    std::string classifier;
    std::string text_classifier;
    std::string vocab;
    double grid_step = 0.01;
    std::string out;
    std::string config_path;
};

void run_fuse_weight(const CLI::App& cmd, FuseWeightArgs args) {
    ConfigFile config;
    config.load(args.config_path);
    config.merge(cmd, "manifest", args.manifest);
    config.merge(cmd, "features", args.features);
    config.merge(cmd, "captions", args.captions);
    config.merge(cmd, "classifier", args.classifier);
    config.merge(cmd, "text-classifier", args.text_classifier);
    config.merge(cmd, "vocab", args.vocab);
    config.merge(cmd, "grid-step", args.grid_step);

    const galev::GalleryManifest manifest = galev::load_manifest(args.manifest);
    const galev::FeatureStore store = galev::load_feature_store(args.features, manifest);
    const galev::CaptionStore captions = galev::load_caption_store(args.captions);
    const galev::LinearModel classifier = galev::load_linear_model(args.classifier);
    const galev::LinearModel text_model = galev::load_linear_model(args.text_classifier);
    const galev::Vocabulary vocab = galev::load_vocabulary(args.vocab);

    std::vector<galev::Vec> p_emb, p_txt;
    std::vector<std::set<int>> labels;
    for (const auto& album : manifest.albums) {
        for (const auto& photo : album.photos) {
            p_emb.push_back(galev::predict_scores(classifier, store.at(photo.photo_id)));
            galev::Vec dense(vocab.size(), 0.0);
            for (std::size_t idx :
                 galev::encode_one_hot(captions.tokens(photo.photo_id), vocab).active_indices) {
                dense[idx] = 1.0;
            }
            p_txt.push_back(galev::predict_scores(text_model, dense));
            labels.push_back(album.labels);
        }
    }

    const double weight = galev::select_fusion_weight(p_emb, p_txt, labels, args.grid_step);
    const json artifact{{"weight", weight},
                        {"accuracy", galev::fused_accuracy(p_emb, p_txt, labels, weight)},
                        {"accuracy_embeddings", galev::fused_accuracy(p_emb, p_txt, labels, 1.0)},
                        {"accuracy_captions", galev::fused_accuracy(p_emb, p_txt, labels, 0.0)},
                        {"grid_step", args.grid_step}};

    const Provenance prov("fuse-weight",
                          json{{"manifest", args.manifest},
                               {"features", args.features},
                               {"captions", args.captions},
                               {"classifier", args.classifier},
                               {"text-classifier", args.text_classifier},
                               {"vocab", args.vocab},
                               {"grid-step", args.grid_step}},
                          0);
    prov.write_artifact(args.out, artifact.dump());
    char line[64];
    std::snprintf(line, sizeof line, "selected w=%.2f", weight);
    std::cout << line << "\n";
}

struct EvaluateArgs {
    std::string manifest;
    std::string features;
    std::string classifier;
    std::string attention;
    std::string metric = "l2";
    std::string space = "scores";
    bool normalize = false;
    std::optional<double> threshold;
    std::string calibration;
    double location_weight = 0.0;
    int repeats = 10;
    std::uint64_t seed = 0;
    std::string out;
    std::string config_path;
};

void run_evaluate(const CLI::App& cmd, EvaluateArgs args) {
    ConfigFile config;
    config.load(args.config_path);
    config.merge(cmd, "manifest", args.manifest);
    config.merge(cmd, "features", args.features);
    config.merge(cmd, "classifier", args.classifier);
    config.merge(cmd, "attention", args.attention);
    config.merge(cmd, "metric", args.metric);
    config.merge(cmd, "space", args.space);
    config.merge(cmd, "normalize", args.normalize);
    config.merge(cmd, "calibration", args.calibration);
    config.merge(cmd, "location-weight", args.location_weight);
    config.merge(cmd, "repeats", args.repeats);
    config.merge(cmd, "seed", args.seed);

    const galev::GalleryManifest manifest = galev::load_manifest(args.manifest);
    const galev::FeatureStore store = galev::load_feature_store(args.features, manifest);
    const galev::LinearModel classifier = galev::load_linear_model(args.classifier);
    const galev::AttentionModel attention = galev::load_attention_model(args.attention);

    galev::SegmentationConfig sc;
    sc.metric = metric_from(args.metric, args.normalize);
    sc.space = galev::space_from_name(args.space);
    sc.threshold = threshold_from_flags(args.threshold, args.calibration);
    sc.location_weight = args.location_weight;

    const galev::EvalReport report = galev::run_shuffled_eval(manifest, store, classifier,
                                                              attention, sc, args.repeats,
                                                              args.seed);
    const Provenance prov("evaluate",
                          json{{"manifest", args.manifest},
                               {"features", args.features},
                               {"classifier", args.classifier},
                               {"attention", args.attention},
                               {"metric", args.metric},
                               {"space", args.space},
                               {"normalize", args.normalize},
                               {"threshold", sc.threshold},
                               {"calibration", args.calibration},
                               {"location-weight", args.location_weight},
                               {"repeats", args.repeats},
                               {"seed", args.seed}},
                          args.seed);
    prov.write_artifact(args.out, galev::eval_report_to_json(report));
    std::cout << galev::format_report_line(report) << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gallery event recognition: sequential album detection, "
                 "attention pooling and caption fusion"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic labeled gallery");
    synth_cmd->add_option("--classes", synth.classes)->capture_default_str();
    synth_cmd->add_option("--dim", synth.dim)->capture_default_str();
    synth_cmd->add_option("--albums-per-class", synth.albums_per_class)->capture_default_str();
    synth_cmd->add_option("--size-min", synth.size_min)->capture_default_str();
    synth_cmd->add_option("--size-max", synth.size_max)->capture_default_str();
    synth_cmd->add_option("--separation", synth.separation)->capture_default_str();
    synth_cmd->add_option("--noise", synth.noise)->capture_default_str();
    synth_cmd->add_option("--scatter", synth.scatter,
                          "Album offset std in directions orthogonal to class means")
        ->capture_default_str();
    synth_cmd->add_option("--irrelevant", synth.irrelevant)->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
    synth_cmd->add_option("--out", synth.out, "Output directory")->required();
    synth_cmd->add_option("--config", synth.config_path, "JSON config with defaults");

    TrainLinearArgs train_linear_args;
    auto* tl_cmd = app.add_subcommand("train-linear", "Train the per-photo confidence classifier");
    tl_cmd->add_option("--manifest", train_linear_args.manifest)->required();
    tl_cmd->add_option("--features", train_linear_args.features)->required();
    tl_cmd->add_option("--multi-label", train_linear_args.multi_label, "auto|on|off")
        ->capture_default_str();
    tl_cmd->add_flag("--normalize-features", train_linear_args.normalize_features,
                     "l2-normalize features before training");
    tl_cmd->add_option("--l2", train_linear_args.l2)->capture_default_str();
    tl_cmd->add_option("--lr", train_linear_args.lr)->capture_default_str();
    tl_cmd->add_option("--epochs", train_linear_args.epochs)->capture_default_str();
    tl_cmd->add_option("--patience", train_linear_args.patience)->capture_default_str();
    tl_cmd->add_option("--seed", train_linear_args.seed)->capture_default_str();
    tl_cmd->add_option("--out", train_linear_args.out)->required();
    tl_cmd->add_option("--config", train_linear_args.config_path);

    TrainAttentionArgs train_attention_args;
    auto* ta_cmd = app.add_subcommand("train-attention", "Train the attention pooling network");
    ta_cmd->add_option("--manifest", train_attention_args.manifest)->required();
    ta_cmd->add_option("--features", train_attention_args.features)->required();
    ta_cmd->add_option("--subset-size", train_attention_args.subset_size)->capture_default_str();
    ta_cmd->add_option("--subsets-per-album", train_attention_args.subsets_per_album)
        ->capture_default_str();
    ta_cmd->add_option("--lr", train_attention_args.lr)->capture_default_str();
    ta_cmd->add_option("--epochs", train_attention_args.epochs)->capture_default_str();
    ta_cmd->add_option("--patience", train_attention_args.patience)->capture_default_str();
    ta_cmd->add_option("--seed", train_attention_args.seed)->capture_default_str();
    ta_cmd->add_option("--out", train_attention_args.out)->required();
    ta_cmd->add_option("--config", train_attention_args.config_path);

    BuildVocabArgs build_vocab_args;
    auto* bv_cmd = app.add_subcommand("build-vocab", "Rank caption tokens into a vocabulary");
    bv_cmd->add_option("--captions", build_vocab_args.captions)->required();
    bv_cmd->add_option("--manifest", build_vocab_args.manifest)->required();
    bv_cmd->add_option("--max-size", build_vocab_args.max_size)->capture_default_str();
    bv_cmd->add_option("--stopwords", build_vocab_args.stopwords, "File with one stopword per line");
    bv_cmd->add_option("--out", build_vocab_args.out)->required();
    bv_cmd->add_option("--config", build_vocab_args.config_path);

    TrainTextArgs train_text_args;
    auto* tt_cmd = app.add_subcommand("train-text", "Train the caption one-hot classifier");
    tt_cmd->add_option("--captions", train_text_args.captions)->required();
    tt_cmd->add_option("--vocab", train_text_args.vocab)->required();
    tt_cmd->add_option("--manifest", train_text_args.manifest)->required();
    tt_cmd->add_option("--multi-label", train_text_args.multi_label, "auto|on|off")
        ->capture_default_str();
    tt_cmd->add_option("--l2", train_text_args.l2)->capture_default_str();
    tt_cmd->add_option("--lr", train_text_args.lr)->capture_default_str();
    tt_cmd->add_option("--epochs", train_text_args.epochs)->capture_default_str();
    tt_cmd->add_option("--patience", train_text_args.patience)->capture_default_str();
    tt_cmd->add_option("--seed", train_text_args.seed)->capture_default_str();
    tt_cmd->add_option("--out", train_text_args.out)->required();
    tt_cmd->add_option("--config", train_text_args.config_path);

    CalibrateArgs calibrate_args;
    auto* cal_cmd = app.add_subcommand("calibrate", "Learn the segmentation threshold");
    cal_cmd->add_option("--manifest", calibrate_args.manifest)->required();
    cal_cmd->add_option("--features", calibrate_args.features)->required();
    cal_cmd->add_option("--classifier", calibrate_args.classifier)->required();
    cal_cmd->add_option("--attention", calibrate_args.attention)->required();
    cal_cmd->add_option("--metric", calibrate_args.metric, "l2|chi2")->capture_default_str();
    cal_cmd->add_option("--space", calibrate_args.space, "embeddings|scores")
        ->capture_default_str();
    cal_cmd->add_flag("--normalize", calibrate_args.normalize, "l2-normalize before matching");
    cal_cmd->add_option("--location-weight", calibrate_args.location_weight)
        ->capture_default_str();
    cal_cmd->add_option("--repeats", calibrate_args.repeats)->capture_default_str();
    cal_cmd->add_option("--seed", calibrate_args.seed)->capture_default_str();
    cal_cmd->add_option("--out", calibrate_args.out)->required();
    cal_cmd->add_option("--config", calibrate_args.config_path);

    SegmentArgs segment_args;
    auto* seg_cmd = app.add_subcommand("segment", "Detect album boundaries in a gallery");
    seg_cmd->add_option("--manifest", segment_args.manifest)->required();
    seg_cmd->add_option("--features", segment_args.features)->required();
    seg_cmd->add_option("--classifier", segment_args.classifier,
                        "Required when --space scores");
    seg_cmd->add_option("--metric", segment_args.metric, "l2|chi2")->capture_default_str();
    seg_cmd->add_option("--space", segment_args.space, "embeddings|scores")
        ->capture_default_str();
    seg_cmd->add_flag("--normalize", segment_args.normalize);
    seg_cmd->add_option("--threshold", segment_args.threshold)->required();
    seg_cmd->add_option("--location-weight", segment_args.location_weight)
        ->capture_default_str();
    seg_cmd->add_option("--out", segment_args.out)->required();
    seg_cmd->add_option("--config", segment_args.config_path);

    PredictArgs predict_args;
    auto* pred_cmd = app.add_subcommand("predict", "Run the full pipeline over a gallery");
    pred_cmd->add_option("--manifest", predict_args.manifest)->required();
    pred_cmd->add_option("--features", predict_args.features)->required();
    pred_cmd->add_option("--classifier", predict_args.classifier)->required();
    pred_cmd->add_option("--attention", predict_args.attention)->required();
    pred_cmd->add_option("--metric", predict_args.metric, "l2|chi2")->capture_default_str();
    pred_cmd->add_option("--space", predict_args.space, "embeddings|scores")
        ->capture_default_str();
    pred_cmd->add_flag("--normalize", predict_args.normalize);
    pred_cmd->add_option("--threshold", predict_args.threshold);
    pred_cmd->add_option("--calibration", predict_args.calibration,
                         "Calibration artifact supplying the threshold");
    pred_cmd->add_flag("--true-boundaries", predict_args.true_boundaries,
                       "Classify the manifest's own albums instead of detecting borders");
    pred_cmd->add_option("--location-weight", predict_args.location_weight)
        ->capture_default_str();
    pred_cmd->add_option("--out", predict_args.out)->required();
    pred_cmd->add_option("--config", predict_args.config_path);

    FuseWeightArgs fuse_args;
    auto* fw_cmd = app.add_subcommand("fuse-weight", "Pick the ensemble weight on validation data");
    fw_cmd->add_option("--manifest", fuse_args.manifest)->required();
    fw_cmd->add_option("--features", fuse_args.features)->required();
    fw_cmd->add_option("--captions", fuse_args.captions)->required();
    fw_cmd->add_option("--classifier", fuse_args.classifier)->required();
    fw_cmd->add_option("--text-classifier", fuse_args.text_classifier)->required();
    fw_cmd->add_option("--vocab", fuse_args.vocab)->required();
    fw_cmd->add_option("--grid-step", fuse_args.grid_step)->capture_default_str();
    fw_cmd->add_option("--out", fuse_args.out)->required();
    fw_cmd->add_option("--config", fuse_args.config_path);

    EvaluateArgs evaluate_args;
    auto* ev_cmd = app.add_subcommand("evaluate", "Shuffled-order evaluation of the pipeline");
    ev_cmd->add_option("--manifest", evaluate_args.manifest)->required();
    ev_cmd->add_option("--features", evaluate_args.features)->required();
    ev_cmd->add_option("--classifier", evaluate_args.classifier)->required();
    ev_cmd->add_option("--attention", evaluate_args.attention)->required();
    ev_cmd->add_option("--metric", evaluate_args.metric, "l2|chi2")->capture_default_str();
    ev_cmd->add_option("--space", evaluate_args.space, "embeddings|scores")
        ->capture_default_str();
    ev_cmd->add_flag("--normalize", evaluate_args.normalize);
    ev_cmd->add_option("--threshold", evaluate_args.threshold);
    ev_cmd->add_option("--calibration", evaluate_args.calibration);
    ev_cmd->add_option("--location-weight", evaluate_args.location_weight)
        ->capture_default_str();
    ev_cmd->add_option("--repeats", evaluate_args.repeats)->capture_default_str();
    ev_cmd->add_option("--seed", evaluate_args.seed)->capture_default_str();
    ev_cmd->add_option("--out", evaluate_args.out)->required();
    ev_cmd->add_option("--config", evaluate_args.config_path);

    try {
        app.parse(argc, argv);
        if (synth_cmd->parsed()) run_synth(*synth_cmd, synth);
        if (tl_cmd->parsed()) run_train_linear(*tl_cmd, train_linear_args);
        if (ta_cmd->parsed()) run_train_attention(*ta_cmd, train_attention_args);
        if (bv_cmd->parsed()) run_build_vocab(*bv_cmd, build_vocab_args);
        if (tt_cmd->parsed()) run_train_text(*tt_cmd, train_text_args);
        if (cal_cmd->parsed()) run_calibrate(*cal_cmd, calibrate_args);
        if (seg_cmd->parsed()) run_segment(*seg_cmd, segment_args);
        if (pred_cmd->parsed()) run_predict(*pred_cmd, predict_args);
        if (fw_cmd->parsed()) run_fuse_weight(*fw_cmd, fuse_args);
        if (ev_cmd->parsed()) run_evaluate(*ev_cmd, evaluate_args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // prints help, exit 0
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        std::cerr << app.help() << "\n";
        return 2;
    } catch (const galev::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const galev::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
