#include "galev/model_io.hpp"

#include <fstream>

#include "json.hpp"

#include "galev/errors.hpp"

namespace galev {

namespace {

using nlohmann::json;

json parse_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("model JSON: ") + e.what());
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open file: " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& text, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write file: " + path);
    out << text;
    if (!text.empty() && text.back() != '\n') out << "\n";
}

Matrix matrix_from_flat(const std::vector<double>& flat, std::size_t rows, std::size_t cols,
                        const char* what) {
    if (flat.size() != rows * cols) {
        throw FormatError(std::string(what) + ": expected " + std::to_string(rows * cols) +
                          " weights, got " + std::to_string(flat.size()));
    }
    Matrix m(rows, cols);
    m.data = flat;
    return m;
}

void check_finite(const Matrix& w, const Vec& b, const char* what) {
    if (!all_finite(w) || !all_finite(b)) {
        throw ValidationError(std::string(what) + ": non-finite parameters");
    }
}

} // namespace

std::string metric_kind_name(MetricKind kind) {
    return kind == MetricKind::euclidean ? "l2" : "chi2";
}

MetricKind metric_kind_from_name(const std::string& name) {
    if (name == "l2" || name == "euclidean") return MetricKind::euclidean;
    if (name == "chi2" || name == "chi_squared") return MetricKind::chi_squared;
    throw ValidationError("unknown metric \"" + name + "\" (expected l2 or chi2)");
}

std::string space_name(SegmentationSpace space) {
    return space == SegmentationSpace::embeddings ? "embeddings" : "scores";
}

SegmentationSpace space_from_name(const std::string& name) {
    if (name == "embeddings") return SegmentationSpace::embeddings;
    if (name == "scores") return SegmentationSpace::scores;
    throw ValidationError("unknown space \"" + name + "\" (expected embeddings or scores)");
}

std::string linear_model_to_json(const LinearModel& model) {
    const json doc{{"kind", model.kind == ScoreKind::probabilistic ? "probabilistic" : "margin"},
                   {"num_classes", model.num_classes()},
                   {"dim", model.dim()},
                   {"weights", model.weights.data},
                   {"bias", model.bias},
                   {"multi_label", model.multi_label}};
    return doc.dump(2);
}

LinearModel linear_model_from_json(const std::string& text) {
    const json doc = parse_text(text);
    LinearModel model;
    try {
        const std::string kind = doc.at("kind").get<std::string>();
        if (kind == "probabilistic") {
            model.kind = ScoreKind::probabilistic;
        } else if (kind == "margin") {
            model.kind = ScoreKind::margin;
        } else {
            throw ValidationError("linear model: unknown kind \"" + kind + "\"");
        }
        const auto rows = doc.at("num_classes").get<std::size_t>();
        const auto cols = doc.at("dim").get<std::size_t>();
        model.weights = matrix_from_flat(doc.at("weights").get<std::vector<double>>(), rows, cols,
                                         "linear model");
        model.bias = doc.at("bias").get<Vec>();
        if (model.bias.size() != rows) throw FormatError("linear model: bias length mismatch");
        model.multi_label = doc.value("multi_label", false);
    } catch (const json::exception& e) {
        throw FormatError(std::string("linear model: ") + e.what());
    }
    check_finite(model.weights, model.bias, "linear model");
    return model;
}

void save_linear_model(const LinearModel& model, const std::string& path) {
    write_file(linear_model_to_json(model), path);
}

LinearModel load_linear_model(const std::string& path) {
    return linear_model_from_json(read_file(path));
}

std::string attention_model_to_json(const AttentionModel& model) {
    const json doc{{"q", model.q},
                   {"dense_weights", model.dense_weights.data},
                   {"dense_bias", model.dense_bias},
                   {"num_classes", model.num_classes()},
                   {"dim", model.dim()},
                   {"multi_label", model.multi_label}};
    return doc.dump(2);
}

AttentionModel attention_model_from_json(const std::string& text) {
    const json doc = parse_text(text);
    AttentionModel model;
    try {
        model.q = doc.at("q").get<Vec>();
        const auto rows = doc.at("num_classes").get<std::size_t>();
        const auto cols = doc.at("dim").get<std::size_t>();
        model.dense_weights = matrix_from_flat(doc.at("dense_weights").get<std::vector<double>>(),
                                               rows, cols, "attention model");
        model.dense_bias = doc.at("dense_bias").get<Vec>();
        model.multi_label = doc.at("multi_label").get<bool>();
        if (model.q.size() != cols) throw FormatError("attention model: q length mismatch");
        if (model.dense_bias.size() != rows) {
            throw FormatError("attention model: bias length mismatch");
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("attention model: ") + e.what());
    }
    check_finite(model.dense_weights, model.dense_bias, "attention model");
    if (!all_finite(model.q)) throw ValidationError("attention model: non-finite q");
    return model;
}

void save_attention_model(const AttentionModel& model, const std::string& path) {
    write_file(attention_model_to_json(model), path);
}

AttentionModel load_attention_model(const std::string& path) {
    return attention_model_from_json(read_file(path));
}

std::string calibration_result_to_json(const CalibrationResult& result) {
    const json doc{{"threshold", result.threshold},
                   {"accuracy", result.accuracy},
                   {"permutation_seed", result.permutation_seed},
                   {"candidates_evaluated", result.candidates_evaluated}};
    return doc.dump(2);
}

CalibrationResult calibration_result_from_json(const std::string& text) {
    const json doc = parse_text(text);
    CalibrationResult result;
    try {
        result.threshold = doc.at("threshold").get<double>();
        result.accuracy = doc.at("accuracy").get<double>();
        result.permutation_seed = doc.at("permutation_seed").get<std::uint64_t>();
        result.candidates_evaluated = doc.at("candidates_evaluated").get<std::size_t>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("calibration result: ") + e.what());
    }
    return result;
}

void save_calibration_result(const CalibrationResult& result, const std::string& path) {
    write_file(calibration_result_to_json(result), path);
}

CalibrationResult load_calibration_result(const std::string& path) {
    return calibration_result_from_json(read_file(path));
}

std::string eval_report_to_json(const EvalReport& report) {
    const json doc{{"mean_accuracy", report.mean_accuracy},
                   {"std_accuracy", report.std_accuracy},
                   {"repeats", report.repeats},
                   {"per_repeat", report.per_repeat},
                   {"config_digest", report.config_digest}};
    return doc.dump(2);
}

EvalReport eval_report_from_json(const std::string& text) {
    const json doc = parse_text(text);
    EvalReport report;
    try {
        report.mean_accuracy = doc.at("mean_accuracy").get<double>();
        report.std_accuracy = doc.at("std_accuracy").get<double>();
        report.repeats = doc.at("repeats").get<int>();
        report.per_repeat = doc.at("per_repeat").get<std::vector<double>>();
        report.config_digest = doc.at("config_digest").get<std::string>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("eval report: ") + e.what());
    }
    return report;
}

std::string boundaries_to_json(const Boundaries& bounds, const SegmentationConfig& config) {
    const json doc{{"ends", bounds.ends}, // 1-based album end positions, last == T
                   {"space", space_name(config.space)},
                   {"metric", metric_kind_name(config.metric.kind)},
                   {"normalized", config.metric.normalize_inputs},
                   {"threshold", config.threshold}};
    return doc.dump(2);
}

void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write file: " + path);
    for (const auto& word : vocab.words) out << word << "\n";
}

Vocabulary load_vocabulary(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open file: " + path);
    Vocabulary vocab;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (vocab.index.count(line)) {
            throw ValidationError(path + ": duplicate vocabulary word \"" + line + "\"");
        }
        vocab.index.emplace(line, vocab.words.size());
        vocab.words.push_back(line);
    }
    return vocab;
}

void save_encoded_captions(const std::vector<std::string>& photo_ids,
                           const std::vector<SparseCaptionVector>& encoded,
                           const std::string& path) {
    if (photo_ids.size() != encoded.size()) {
        throw ValidationError("save_encoded_captions: mismatched lists");
    }
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write file: " + path);
    for (std::size_t i = 0; i < photo_ids.size(); ++i) {
        const json line{{"photo_id", photo_ids[i]}, {"active", encoded[i].active_indices}};
        out << line.dump() << "\n";
    }
}

} // namespace galev
